"""Pydantic domain models shared across the package."""

import logging
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_serializer,
    field_validator,
    model_validator,
)

from .constants import (
    DEFAULT_LEVELS,
    DEFAULT_Z,
    GRAY_LEVELS,
    MAX_INTENSITY,
    MAX_Z,
)
from .errors import DimensionMismatch, InvalidCount

logger = logging.getLogger(__name__)


class HistScope(str, Enum):
    """Which frames feed the shared intensity histogram."""

    SEQUENCE = "sequence"
    FIRST_FRAME = "first-frame"


class Verdict(str, Enum):
    SPECKLE_FREE = "speckle_free"
    DENOISED = "denoised"


class ShrinkMode(str, Enum):
    SOFT = "soft"
    HARD = "hard"


class ThresholdRule(str, Enum):
    UNIVERSAL = "universal"
    MANUAL = "manual"


class NoiseDistribution(str, Enum):
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"


def _inf_to_str(value: float):
    """Render infinities as the literal "inf" for stable JSON."""
    if value == float("inf"):
        return "inf"
    return value


class Frame(BaseModel):
    """One 8-bit grayscale image, stored row-major as a (height, width) array."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    data: np.ndarray = Field(..., description="(height, width) uint8 intensities")

    @field_validator("data", mode="before")
    @classmethod
    def validate_data(cls, value):
        array = np.asarray(value)
        if array.ndim != 2 or array.shape[0] < 1 or array.shape[1] < 1:
            raise ValueError(f"frame data must be a non-empty 2-D array, got {array.shape}")
        if array.dtype != np.uint8:
            if array.dtype.kind not in "iu" and not (
                array.dtype.kind == "f" and np.all(np.mod(array, 1) == 0)
            ):
                raise ValueError("frame intensities must be integers")
            if array.min() < 0 or array.max() > MAX_INTENSITY:
                raise ValueError("frame intensities must lie in [0, 255]")
            array = array.astype(np.uint8)
        else:
            array = array.copy()
        array.setflags(write=False)
        return array

    @classmethod
    def from_values(cls, width: int, height: int, values: Sequence[int]) -> "Frame":
        """Build a frame from a flat row-major intensity list."""
        if len(values) != width * height:
            raise ValueError(
                f"expected {width * height} intensities for {width}x{height}, "
                f"got {len(values)}"
            )
        return cls(data=np.asarray(values, dtype=np.int64).reshape(height, width))

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def n_pixels(self) -> int:
        return self.width * self.height

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    def values(self) -> List[int]:
        """Row-major intensity list."""
        return self.data.ravel().tolist()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    __hash__ = None


class FrameSequence(BaseModel):
    """N_F equally-sized frames of the same scene."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    frames: Tuple[Frame, ...]

    @classmethod
    def of(cls, frames: Sequence[Frame]) -> "FrameSequence":
        """Build a sequence, raising DimensionMismatch on unequal frame sizes."""
        frames = tuple(frames)
        if not frames:
            raise InvalidCount("a frame sequence needs at least one frame")
        shape = frames[0].shape
        for index, frame in enumerate(frames):
            if frame.shape != shape:
                raise DimensionMismatch(
                    f"frame {index} is {frame.width}x{frame.height}, "
                    f"expected {shape[1]}x{shape[0]}"
                )
        return cls(frames=frames)

    @model_validator(mode="after")
    def check_shapes(self) -> "FrameSequence":
        if not self.frames:
            raise ValueError("a frame sequence needs at least one frame")
        if len({frame.shape for frame in self.frames}) != 1:
            raise ValueError("all frames must share identical width and height")
        return self

    @property
    def count(self) -> int:
        return len(self.frames)

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    @property
    def n_pixels(self) -> int:
        return self.frames[0].n_pixels

    def stack(self) -> np.ndarray:
        """(N_F, height, width) uint8 view of the whole sequence."""
        return np.stack([frame.data for frame in self.frames])

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrameSequence):
            return NotImplemented
        return self.count == other.count and all(
            a == b for a, b in zip(self.frames, other.frames)
        )

    __hash__ = None


class Histogram(BaseModel):
    """256 gray-level bin counters."""

    bins: List[int] = Field(..., min_length=GRAY_LEVELS, max_length=GRAY_LEVELS)

    @field_validator("bins")
    @classmethod
    def non_negative(cls, bins: List[int]) -> List[int]:
        if any(count < 0 for count in bins):
            raise ValueError("histogram bins must be non-negative")
        return bins

    @property
    def total(self) -> int:
        return sum(self.bins)

    def probabilities(self) -> List[float]:
        """Probability of occurrence of each gray level."""
        total = self.total
        if total == 0:
            return [0.0] * GRAY_LEVELS
        return [count / total for count in self.bins]


class RegionPartition(BaseModel):
    """2Z-1 contiguous, disjoint intensity ranges covering [0, 255]."""

    z: int = Field(..., ge=1)
    regions: List[Tuple[int, int]]
    target: float = Field(..., description="N_m, the per-region pixel target")
    counts: List[int] = Field(default_factory=list, description="pixels per region")

    @model_validator(mode="after")
    def check_cover(self) -> "RegionPartition":
        if len(self.regions) != 2 * self.z - 1:
            raise ValueError(f"expected {2 * self.z - 1} regions, got {len(self.regions)}")
        if self.regions[0][0] != 0 or self.regions[-1][1] != MAX_INTENSITY:
            raise ValueError("regions must cover [0, 255]")
        for (lo, hi), (next_lo, _) in zip(self.regions, self.regions[1:]):
            if next_lo != hi + 1:
                raise ValueError("regions must be contiguous and disjoint")
        if any(lo > hi for lo, hi in self.regions):
            raise ValueError("every region needs a non-empty intensity range")
        return self

    def lookup_table(self) -> np.ndarray:
        """Region index for every gray level, shape (256,)."""
        table = np.empty(GRAY_LEVELS, dtype=np.int64)
        for index, (lo, hi) in enumerate(self.regions):
            table[lo : hi + 1] = index
        return table


class GranuleCounters(BaseModel):
    """Per-pixel region-transition counters (MEM_FLAGS)."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    flags: np.ndarray
    register_width: int = Field(..., ge=1)


class ActivityReport(BaseModel):
    """Granular count and activity index of one frame sequence."""

    granular_count: int = Field(..., ge=0)
    frames_used: int = Field(..., ge=1)
    per_region_granules: List[int]

    @property
    def activity_fraction(self) -> Fraction:
        return Fraction(self.granular_count, self.frames_used)

    @property
    def activity_index(self) -> float:
        return self.granular_count / self.frames_used


class ThresholdSpec(BaseModel):
    """How wavelet detail coefficients are shrunk."""

    mode: ShrinkMode = ShrinkMode.SOFT
    rule: ThresholdRule = ThresholdRule.UNIVERSAL
    manual_value: Optional[float] = Field(default=None, ge=0.0)
    sigma_estimate: Optional[float] = Field(default=None, ge=0.0)

    @model_validator(mode="after")
    def manual_needs_value(self) -> "ThresholdSpec":
        if self.rule == ThresholdRule.MANUAL and self.manual_value is None:
            raise ValueError("the manual threshold rule requires manual_value")
        return self


DetailBands = Tuple[np.ndarray, np.ndarray, np.ndarray]


class WaveletDecomposition(BaseModel):
    """Multi-level 2-D Haar pyramid. ``details[0]`` is the finest level."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    levels: int = Field(..., ge=1)
    ll: np.ndarray
    details: List[DetailBands]
    original_shape: Tuple[int, int]
    level_shapes: List[Tuple[int, int]] = Field(
        ..., description="input shape of each level before edge replication"
    )

    def coefficient_count(self) -> int:
        return int(self.ll.size + sum(band.size for bands in self.details for band in bands))


class SpeckleParams(BaseModel):
    variance: float = Field(..., ge=0.0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    distribution: NoiseDistribution = NoiseDistribution.UNIFORM


class MetricReport(BaseModel):
    """Image-quality figures of one clean / noisy / denoised triple."""

    mse1: float = Field(..., ge=0.0, description="clean vs noisy")
    mse2: float = Field(..., ge=0.0, description="noisy vs denoised")
    psnr1: float
    psnr2: float
    ief: float
    psnr_clean_denoised: float

    @field_serializer("psnr1", "psnr2", "ief", "psnr_clean_denoised", when_used="json")
    def serialize_inf(self, value: float):
        return _inf_to_str(value)


class PipelineConfig(BaseModel):
    z: int = Field(default=DEFAULT_Z, ge=1, le=MAX_Z)
    activity_threshold: Optional[float] = Field(
        default=None, ge=0.0, description="None resolves to the fractional default"
    )
    wavelet_levels: int = Field(default=DEFAULT_LEVELS, ge=1)
    threshold_spec: ThresholdSpec = Field(default_factory=ThresholdSpec)
    hist_scope: HistScope = HistScope.SEQUENCE
    homomorphic: bool = False
    metrics_frame_index: int = Field(default=0, ge=0)
    register_width: Optional[int] = Field(
        default=None, ge=1, description="hwsim MEM_FLAGS width L; None derives it"
    )


class PipelineResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    report: ActivityReport
    partition: RegionPartition
    verdict: Verdict
    threshold: float
    forced: bool = False
    denoised_frames: Optional[FrameSequence] = None
    metrics: Optional[MetricReport] = None
    timing: Dict[str, float] = Field(default_factory=dict)


class FixedPointQuotient(BaseModel):
    quotient: int = Field(..., ge=0)
    remainder: int = Field(..., ge=0)


class HwReport(BaseModel):
    cycles_total: int = Field(..., ge=0)
    stage_cycles: Dict[str, int]
    hist_mem_bits: int
    flag_mem_bits: int
    hist_reg_width: int
    flag_reg_width: int
    activity_index_fixed: FixedPointQuotient


class RunManifest(BaseModel):
    config: dict
    inputs: List[str] = Field(default_factory=list)
    seed: Optional[int] = None
    tool_version: str
    started_at: str
