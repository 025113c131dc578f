"""Speckle activity detection and wavelet de-noising."""

import logging

from .constants import APP_VERSION, LOG_FORMAT, LOG_LEVEL

__version__ = APP_VERSION

# Configure logging
logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)

logger = logging.getLogger(__name__)

from .activity import (  # noqa: E402
    assign_region,
    compute_granular,
    compute_histogram,
    compute_region_boundaries,
    counter_memory_bits,
    histogram_memory_bits,
)
from .frame_io import load_frame, load_sequence, save_frame  # noqa: E402
from .hwsim import divider, stream_run  # noqa: E402
from .metrics import ief, metric_report, mse, psnr  # noqa: E402
from .models import Frame, FrameSequence, PipelineConfig, ThresholdSpec  # noqa: E402
from .noise import add_speckle, noise_sequence  # noqa: E402
from .pipeline import decide_denoise, run_pipeline  # noqa: E402
from .wavelet import denoise, dwt2_forward, dwt2_inverse  # noqa: E402

__all__ = [
    "__version__",
    "Frame",
    "FrameSequence",
    "PipelineConfig",
    "ThresholdSpec",
    "load_frame",
    "save_frame",
    "load_sequence",
    "compute_histogram",
    "compute_region_boundaries",
    "assign_region",
    "compute_granular",
    "histogram_memory_bits",
    "counter_memory_bits",
    "dwt2_forward",
    "dwt2_inverse",
    "denoise",
    "add_speckle",
    "noise_sequence",
    "mse",
    "psnr",
    "ief",
    "metric_report",
    "run_pipeline",
    "decide_denoise",
    "stream_run",
    "divider",
]
