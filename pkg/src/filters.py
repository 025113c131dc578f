"""Classical single-frame speckle filters used as comparison baselines."""

import logging

import numpy as np
from scipy.ndimage import median_filter, uniform_filter

from .constants import MAX_INTENSITY
from .models import Frame

logger = logging.getLogger(__name__)

DEFAULT_SIZE = 3


def _to_frame(values: np.ndarray) -> Frame:
    return Frame(data=np.rint(np.clip(values, 0.0, MAX_INTENSITY)).astype(np.uint8))


def mean_filter(frame: Frame, size: int = DEFAULT_SIZE) -> Frame:
    return _to_frame(uniform_filter(frame.data.astype(np.float64), size=size, mode="nearest"))


def median_filter_frame(frame: Frame, size: int = DEFAULT_SIZE) -> Frame:
    return Frame(data=median_filter(frame.data, size=size, mode="nearest"))


def lee_filter(frame: Frame, size: int = DEFAULT_SIZE) -> Frame:
    """
    Local-statistics Lee filter.

    Each pixel is pulled toward its window mean by the weight
    var_local / (var_local + var_noise), where var_noise is the mean local
    variance over the frame.
    """
    x = frame.data.astype(np.float64)
    local_mean = uniform_filter(x, size=size, mode="nearest")
    local_sq = uniform_filter(x * x, size=size, mode="nearest")
    local_var = np.maximum(local_sq - local_mean**2, 0.0)
    noise_var = float(local_var.mean())
    denominator = local_var + noise_var
    weight = np.divide(
        local_var, denominator, out=np.zeros_like(local_var), where=denominator > 0
    )
    return _to_frame(local_mean + weight * (x - local_mean))


BASELINES = {
    "mean": mean_filter,
    "median": median_filter_frame,
    "lee": lee_filter,
}
