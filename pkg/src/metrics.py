"""MSE, PSNR and IEF on integer frames."""

import logging
import math

import numpy as np

from .constants import MAX_INTENSITY
from .errors import DimensionMismatch
from .models import Frame, MetricReport

logger = logging.getLogger(__name__)

INF = float("inf")


def _check_shapes(*frames: Frame) -> None:
    shapes = {frame.shape for frame in frames}
    if len(shapes) != 1:
        raise DimensionMismatch(f"frames differ in size: {sorted(shapes)}")


def _squared_error_sum(a: Frame, b: Frame) -> int:
    diff = a.data.astype(np.int64) - b.data.astype(np.int64)
    return int(np.sum(diff * diff))


def mse(a: Frame, b: Frame) -> float:
    """Mean squared error over all pixels."""
    _check_shapes(a, b)
    return _squared_error_sum(a, b) / a.n_pixels


def psnr_from_mse(value: float) -> float:
    if value == 0:
        return INF
    return 10.0 * math.log10(MAX_INTENSITY**2 / value)


def psnr(a: Frame, b: Frame) -> float:
    """10 log10(255^2 / MSE); identical frames give +inf."""
    return psnr_from_mse(mse(a, b))


def ief(clean: Frame, noisy: Frame, denoised: Frame) -> float:
    """Image enhancement factor sum((noisy-clean)^2) / sum((denoised-clean)^2)."""
    _check_shapes(clean, noisy, denoised)
    denominator = _squared_error_sum(denoised, clean)
    if denominator == 0:
        return INF
    return _squared_error_sum(noisy, clean) / denominator


def metric_report(clean: Frame, noisy: Frame, denoised: Frame) -> MetricReport:
    """All table figures; PSNR2 pairs the noisy and the denoised image."""
    _check_shapes(clean, noisy, denoised)
    mse1 = mse(clean, noisy)
    mse2 = mse(noisy, denoised)
    report = MetricReport(
        mse1=mse1,
        mse2=mse2,
        psnr1=psnr_from_mse(mse1),
        psnr2=psnr_from_mse(mse2),
        ief=ief(clean, noisy, denoised),
        psnr_clean_denoised=psnr(clean, denoised),
    )
    logger.debug(f"Metrics: {report.model_dump()}")
    return report
