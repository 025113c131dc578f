"""Deterministic multiplicative speckle synthesis.

Noise samples come from a counter-based SplitMix64 stream so that a given
(seed, pixel index) always yields the same value on every platform and numpy
version:

    state_k = seed + (k + 1) * 0x9E3779B97F4A7C15        (mod 2**64)
    z = (state_k ^ (state_k >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z = z ^ (z >> 31)
    u_k = (z >> 11) * 2**-53                              in [0, 1)

Frame i of a sequence uses seed + i.
"""

import logging
import math

import numpy as np

from .constants import MAX_INTENSITY
from .errors import InvalidCount
from .models import Frame, FrameSequence, NoiseDistribution, SpeckleParams

logger = logging.getLogger(__name__)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def splitmix64(seed: int, count: int) -> np.ndarray:
    """First ``count`` outputs of the SplitMix64 stream for ``seed``."""
    with np.errstate(over="ignore"):
        z = np.uint64(seed & _MASK64) + np.arange(1, count + 1, dtype=np.uint64) * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def uniform_stream(seed: int, count: int) -> np.ndarray:
    """``count`` doubles in [0, 1) with 53 random bits each."""
    return (splitmix64(seed, count) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def speckle_field(shape, params: SpeckleParams) -> np.ndarray:
    """Zero-mean noise n with Var(n) == params.variance, one sample per pixel."""
    count = int(np.prod(shape))
    if params.variance == 0:
        return np.zeros(shape)
    if params.distribution == NoiseDistribution.GAUSSIAN:
        u = uniform_stream(params.seed, 2 * count)
        radius = np.sqrt(-2.0 * np.log(1.0 - u[:count]))
        n = math.sqrt(params.variance) * radius * np.cos(2.0 * math.pi * u[count:])
    else:
        half_width = math.sqrt(3.0 * params.variance)
        n = (2.0 * uniform_stream(params.seed, count) - 1.0) * half_width
    return n.reshape(shape)


def add_speckle(frame: Frame, params: SpeckleParams) -> Frame:
    """J = I + n * I, clamped to [0, 255] and rounded half-to-even."""
    if params.variance == 0:
        return frame
    clean = frame.data.astype(np.float64)
    noisy = clean + speckle_field(clean.shape, params) * clean
    noisy = np.rint(np.clip(noisy, 0.0, MAX_INTENSITY))
    return Frame(data=noisy.astype(np.uint8))


def noise_sequence(frame: Frame, params: SpeckleParams, n_frames: int) -> FrameSequence:
    """``n_frames`` independent speckle realizations of one clean frame."""
    if n_frames < 1:
        raise InvalidCount(f"need at least one frame, got {n_frames}")
    frames = [
        add_speckle(frame, params.model_copy(update={"seed": (params.seed + i) & _MASK64}))
        for i in range(n_frames)
    ]
    logger.info(
        f"Synthesized {n_frames} frames at variance {params.variance} "
        f"({params.distribution.value}, seed {params.seed})"
    )
    return FrameSequence.of(frames)
