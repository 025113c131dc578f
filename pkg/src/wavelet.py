"""Orthonormal 2-D Haar transform and wavelet-shrinkage de-noising.

Band naming follows the order of the separable passes: the first letter is the
filter applied along rows, the second the one applied along columns. ``hl``
therefore holds horizontal differences smoothed vertically.
"""

import logging
import math
from typing import Optional

import numpy as np

from .constants import DEFAULT_LEVELS, HOMOMORPHIC_OFFSET, MAD_SCALE, MAX_INTENSITY
from .errors import DataError, DepthTooLarge, EmptyInput, InvalidCount, ShapeMismatch
from .models import (
    Frame,
    ShrinkMode,
    ThresholdRule,
    ThresholdSpec,
    WaveletDecomposition,
)

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)


def max_depth(height: int, width: int) -> int:
    return int(math.floor(math.log2(min(height, width)))) if min(height, width) > 0 else 0


def dwt2_forward(frame: np.ndarray, levels: int = DEFAULT_LEVELS) -> WaveletDecomposition:
    """
    Multi-level orthonormal Haar analysis.

    Odd dimensions are extended by replicating the last row or column; the
    pre-extension shape of every level is recorded so the inverse can trim.

    Raises:
        EmptyInput: zero-sized input
        DepthTooLarge: levels outside 1..floor(log2(min(height, width)))
    """
    x = np.asarray(frame, dtype=np.float64)
    if x.ndim != 2 or x.size == 0:
        raise EmptyInput(f"expected a non-empty 2-D matrix, got shape {x.shape}")
    limit = max_depth(*x.shape)
    if not 1 <= levels <= limit:
        raise DepthTooLarge(f"{levels} levels requested, {x.shape} allows 1..{limit}")

    details = []
    level_shapes = []
    current = x
    for _ in range(levels):
        height, width = current.shape
        level_shapes.append((height, width))
        padded = np.pad(current, ((0, height % 2), (0, width % 2)), mode="edge")

        lo_rows = (padded[:, 0::2] + padded[:, 1::2]) / SQRT2
        hi_rows = (padded[:, 0::2] - padded[:, 1::2]) / SQRT2

        ll = (lo_rows[0::2] + lo_rows[1::2]) / SQRT2
        lh = (lo_rows[0::2] - lo_rows[1::2]) / SQRT2
        hl = (hi_rows[0::2] + hi_rows[1::2]) / SQRT2
        hh = (hi_rows[0::2] - hi_rows[1::2]) / SQRT2

        details.append((lh, hl, hh))
        current = ll

    return WaveletDecomposition(
        levels=levels,
        ll=current,
        details=details,
        original_shape=x.shape,
        level_shapes=level_shapes,
    )


def dwt2_inverse(dec: WaveletDecomposition) -> np.ndarray:
    """Haar synthesis, trimmed back to ``dec.original_shape``."""
    if len(dec.details) != dec.levels or len(dec.level_shapes) != dec.levels:
        raise ShapeMismatch(
            f"decomposition declares {dec.levels} levels but carries "
            f"{len(dec.details)} detail sets"
        )
    current = np.asarray(dec.ll, dtype=np.float64)
    for level in reversed(range(dec.levels)):
        lh, hl, hh = dec.details[level]
        if not (lh.shape == hl.shape == hh.shape == current.shape):
            raise ShapeMismatch(
                f"level {level + 1}: band shapes {lh.shape}, {hl.shape}, {hh.shape} "
                f"do not match approximation {current.shape}"
            )
        height, width = current.shape
        lo_rows = np.empty((2 * height, width))
        hi_rows = np.empty((2 * height, width))
        lo_rows[0::2] = (current + lh) / SQRT2
        lo_rows[1::2] = (current - lh) / SQRT2
        hi_rows[0::2] = (hl + hh) / SQRT2
        hi_rows[1::2] = (hl - hh) / SQRT2

        out = np.empty((2 * height, 2 * width))
        out[:, 0::2] = (lo_rows + hi_rows) / SQRT2
        out[:, 1::2] = (lo_rows - hi_rows) / SQRT2

        target_h, target_w = dec.level_shapes[level]
        if target_h > 2 * height or target_w > 2 * width:
            raise ShapeMismatch(
                f"level {level + 1} cannot restore shape {(target_h, target_w)}"
            )
        current = out[:target_h, :target_w]
    return current


def estimate_sigma(dec: WaveletDecomposition) -> float:
    """Robust noise estimate: median(|HH of the finest level|) / 0.6745."""
    hh = dec.details[0][2]
    return float(np.median(np.abs(hh)) / MAD_SCALE)


def universal_threshold(sigma: float, n: int) -> float:
    """VisuShrink threshold sigma * sqrt(2 ln n)."""
    if n < 2:
        raise InvalidCount(f"the universal threshold needs n >= 2, got {n}")
    if sigma < 0:
        raise DataError(f"sigma must be non-negative, got {sigma}")
    return sigma * math.sqrt(2.0 * math.log(n))


def soft_threshold(coefficients: np.ndarray, t: float) -> np.ndarray:
    return np.sign(coefficients) * np.maximum(np.abs(coefficients) - t, 0.0)


def hard_threshold(coefficients: np.ndarray, t: float) -> np.ndarray:
    return coefficients * (np.abs(coefficients) > t)


def resolve_threshold(dec: WaveletDecomposition, spec: ThresholdSpec) -> float:
    """Concrete threshold value for ``spec`` on this decomposition."""
    if spec.rule == ThresholdRule.MANUAL:
        return float(spec.manual_value)
    sigma = spec.sigma_estimate
    if sigma is None:
        sigma = estimate_sigma(dec)
    n = dec.original_shape[0] * dec.original_shape[1]
    return universal_threshold(sigma, n)


def apply_threshold(
    dec: WaveletDecomposition, spec: ThresholdSpec, value: Optional[float] = None
) -> WaveletDecomposition:
    """Shrink every detail band; the approximation band is left untouched."""
    t = resolve_threshold(dec, spec) if value is None else value
    shrink = soft_threshold if spec.mode == ShrinkMode.SOFT else hard_threshold
    details = [tuple(shrink(band, t) for band in bands) for bands in dec.details]
    logger.debug(f"Applied {spec.mode.value} threshold {t:.6g} to {dec.levels} levels")
    return dec.model_copy(update={"details": details})


def denoise(
    frame: Frame,
    levels: int = DEFAULT_LEVELS,
    spec: Optional[ThresholdSpec] = None,
    homomorphic: bool = False,
) -> Frame:
    """
    Wavelet-shrinkage de-noising of one frame.

    Args:
        frame: noisy input
        levels: decomposition depth J
        spec: shrinkage settings, soft/universal when omitted
        homomorphic: threshold in the log domain (log(x + 1) before, exp after)

    Returns:
        Frame: clamped to [0, 255], rounded half-to-even
    """
    spec = spec or ThresholdSpec()
    x = frame.data.astype(np.float64)
    if homomorphic:
        x = np.log(x + HOMOMORPHIC_OFFSET)

    dec = dwt2_forward(x, levels)
    restored = dwt2_inverse(apply_threshold(dec, spec))

    if homomorphic:
        restored = np.exp(restored) - HOMOMORPHIC_OFFSET
    restored = np.rint(np.clip(restored, 0.0, MAX_INTENSITY))
    return Frame(data=restored.astype(np.uint8))
