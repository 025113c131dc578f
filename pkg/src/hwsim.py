"""Cycle-counting emulation of the streaming activity-index hardware.

Four stages run strictly in order, each gated by the finish flag of the
previous one:

  histogram  one pxIn per cycle into the 256 MEM_HIST bin registers
  regions    one bin register read per cycle by the region-limit scanner
  granular   one pxIn per cycle; the pixel's region is compared with the
             same position of the previous frame and MEM_FLAGS updated
  activity   restoring divider, one quotient bit per cycle

Only pxIn, MEM_HIST, MEM_FLAGS and the finish flags have counterparts in the
published module descriptions; the remaining port and register names are
this emulator's own.
"""

import logging
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from .activity import (
    closes_region,
    counter_memory_bits,
    default_register_width,
    histogram_memory_bits,
)
from .constants import GRAY_LEVELS, MAX_INTENSITY, MAX_Z
from .errors import (
    DataError,
    DivideByZero,
    InvalidZ,
    OverflowDetected,
    TooManyRegions,
)
from .models import (
    ActivityReport,
    FixedPointQuotient,
    FrameSequence,
    HistScope,
    HwReport,
    PipelineConfig,
    Verdict,
)

logger = logging.getLogger(__name__)

STAGES = ("histogram", "regions", "granular", "activity")

Tracer = Callable[[int, str, int, int], None]


class TraceWriter:
    """Writes one tab-separated ``cycle, stage, index, value`` line per cycle."""

    def __init__(self, path):
        self.path = Path(path)
        self._handle = None

    def __enter__(self) -> "TraceWriter":
        self._handle = self.path.open("w", newline="\n")
        self._handle.write("cycle\tstage\tindex\tvalue\n")
        return self

    def __exit__(self, *exc) -> None:
        self._handle.close()

    def __call__(self, cycle: int, stage: str, index: int, value: int) -> None:
        self._handle.write(f"{cycle}\t{stage}\t{index}\t{value}\n")


class StreamState:
    """Register file of one emulated run."""

    def __init__(self, n_pixels: int, n_frames: int, hist_width: int, flag_width: int):
        self.n_pixels = n_pixels
        self.n_frames = n_frames
        self.hist_width = hist_width
        self.flag_width = flag_width
        self.mem_hist = [0] * GRAY_LEVELS
        self.mem_flags = [0] * n_pixels
        self.region_regs: List[Tuple[int, int]] = []
        self.pixel_cursor = 0
        self.finish: Dict[str, bool] = {stage: False for stage in STAGES}
        self.cycles = 0
        self.stage_cycles: Dict[str, int] = {stage: 0 for stage in STAGES}

    def begin(self, stage: str) -> None:
        position = STAGES.index(stage)
        if position and not self.finish[STAGES[position - 1]]:
            raise RuntimeError(f"stage '{stage}' started before '{STAGES[position - 1]}'")
        self.pixel_cursor = 0

    def tick(self, stage: str) -> int:
        self.cycles += 1
        self.stage_cycles[stage] += 1
        return self.cycles

    def done(self, stage: str) -> None:
        self.finish[stage] = True
        logger.debug(f"Finish '{stage}' at cycle {self.cycles}")


def _restoring_divide(numerator: int, denominator: int) -> Tuple[int, int, int]:
    """Shift-subtract division; returns quotient, remainder and cycles used."""
    quotient = 0
    remainder = 0
    steps = max(1, numerator.bit_length())
    for bit in reversed(range(steps)):
        remainder = (remainder << 1) | ((numerator >> bit) & 1)
        quotient <<= 1
        if remainder >= denominator:
            remainder -= denominator
            quotient |= 1
    return quotient, remainder, steps


def divider(numerator: int, denominator: int) -> Tuple[int, int]:
    """Euclidean division as produced by the hardware divider unit."""
    if denominator <= 0:
        raise DivideByZero(f"denominator must be positive, got {denominator}")
    if numerator < 0:
        raise DataError(f"numerator must be non-negative, got {numerator}")
    quotient, remainder, _ = _restoring_divide(numerator, denominator)
    return quotient, remainder


def _histogram_pass(state: StreamState, pixels: List[List[int]], trace: Optional[Tracer]):
    state.begin("histogram")
    limit = (1 << state.hist_width) - 1
    mem_hist = state.mem_hist
    for frame in pixels:
        for value in frame:
            cycle = state.tick("histogram")
            if mem_hist[value] == limit:
                logger.warning(f"MEM_HIST bin {value} saturated at cycle {cycle}")
                raise OverflowDetected("histogram", value, cycle, state.hist_width)
            mem_hist[value] += 1
            state.pixel_cursor += 1
            if trace is not None:
                trace(cycle, "histogram", state.pixel_cursor - 1, value)
    state.done("histogram")


def _region_pass(state: StreamState, z: int, trace: Optional[Tracer]) -> None:
    state.begin("regions")
    n_regions = 2 * z - 1
    total = sum(state.mem_hist)
    region = 0
    start = 0
    acc = 0
    counted = 0
    for i in range(GRAY_LEVELS):
        cycle = state.tick("regions")
        acc += state.mem_hist[i]
        if trace is not None:
            trace(cycle, "regions", i, region)
        if region == n_regions - 1:
            continue
        cap = MAX_INTENSITY - (n_regions - 1 - region)
        if closes_region(acc, state.mem_hist[i + 1], total, n_regions):
            state.region_regs.append((start, i))
            counted += acc
            region += 1
            start = i + 1
            acc = 0
        elif i == cap:
            raise TooManyRegions(
                f"cannot form {n_regions} non-empty regions for Z={z}: "
                f"region {region} exhausts the histogram"
            )
    if total - counted == 0:
        raise TooManyRegions(
            f"cannot form {n_regions} non-empty regions for Z={z}: "
            "no pixels remain for the last region"
        )
    state.region_regs.append((start, MAX_INTENSITY))
    state.done("regions")


def _granular_pass(
    state: StreamState, pixels: List[List[int]], trace: Optional[Tracer]
) -> Tuple[int, List[int]]:
    state.begin("granular")
    lut = [0] * GRAY_LEVELS
    for index, (lo, hi) in enumerate(state.region_regs):
        for level in range(lo, hi + 1):
            lut[level] = index
    granules = [0] * len(state.region_regs)
    flag_limit = (1 << state.flag_width) - 1
    mem_flags = state.mem_flags
    previous = [0] * state.n_pixels
    granular_count = 0

    for t, frame in enumerate(pixels):
        for p, value in enumerate(frame):
            cycle = state.tick("granular")
            region = lut[value]
            if t == 0:
                granules[region] += 1
            elif region != previous[p]:
                if mem_flags[p] == flag_limit:
                    logger.warning(f"MEM_FLAGS counter {p} saturated at cycle {cycle}")
                    raise OverflowDetected("granular", p, cycle, state.flag_width)
                mem_flags[p] += 1
                granular_count += 1
                granules[region] += 1
            previous[p] = region
            state.pixel_cursor += 1
            if trace is not None:
                trace(cycle, "granular", p, region)
    state.done("granular")
    return granular_count, granules


def _activity_pass(
    state: StreamState, granular_count: int, trace: Optional[Tracer]
) -> FixedPointQuotient:
    state.begin("activity")
    quotient, remainder, steps = _restoring_divide(granular_count, state.n_frames)
    for step in range(steps):
        cycle = state.tick("activity")
        if trace is not None:
            trace(cycle, "activity", step, quotient >> (steps - 1 - step))
    state.done("activity")
    return FixedPointQuotient(quotient=quotient, remainder=remainder)


def stream_run(
    seq: FrameSequence,
    cfg: Optional[PipelineConfig] = None,
    trace: Optional[Tracer] = None,
) -> Tuple[ActivityReport, HwReport]:
    """
    Emulate the histogram, region, granular and activity modules pixel by pixel.

    The resulting ActivityReport equals ``activity.compute_granular`` on the
    same inputs.

    Raises:
        OverflowDetected: a MEM_HIST or MEM_FLAGS register would exceed its width
        TooManyRegions: the histogram cannot feed 2Z-1 regions
    """
    cfg = cfg or PipelineConfig()
    if not 1 <= cfg.z <= MAX_Z:
        raise InvalidZ(f"Z must lie in 1..{MAX_Z}, got {cfg.z}")

    pixels = [frame.data.ravel().tolist() for frame in seq.frames]
    hist_pixels = pixels[:1] if cfg.hist_scope == HistScope.FIRST_FRAME else pixels
    hist_samples = seq.n_pixels * len(hist_pixels)
    flag_width = cfg.register_width or default_register_width(seq.count)

    state = StreamState(
        n_pixels=seq.n_pixels,
        n_frames=seq.count,
        hist_width=hist_samples.bit_length(),
        flag_width=flag_width,
    )
    _histogram_pass(state, hist_pixels, trace)
    _region_pass(state, cfg.z, trace)
    granular_count, granules = _granular_pass(state, pixels, trace)
    fixed = _activity_pass(state, granular_count, trace)

    report = ActivityReport(
        granular_count=granular_count,
        frames_used=seq.count,
        per_region_granules=granules,
    )
    hw = HwReport(
        cycles_total=state.cycles,
        stage_cycles=dict(state.stage_cycles),
        hist_mem_bits=histogram_memory_bits(hist_samples),
        flag_mem_bits=counter_memory_bits(seq.n_pixels, flag_width),
        hist_reg_width=state.hist_width,
        flag_reg_width=flag_width,
        activity_index_fixed=fixed,
    )
    logger.info(
        f"Stream run: {state.cycles} cycles, granular count {granular_count}, "
        f"activity {fixed.quotient} r{fixed.remainder}/{seq.count}"
    )
    return report, hw


def hw_verdict(granular_count: int, n_frames: int, threshold: float) -> Verdict:
    """Gate in integers: de-noise iff granular_count > threshold * N_F."""
    if Fraction(granular_count) > Fraction(threshold) * n_frames:
        return Verdict.DENOISED
    return Verdict.SPECKLE_FREE
