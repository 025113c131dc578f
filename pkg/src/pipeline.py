"""Detect speckle activity, gate on the threshold, conditionally de-noise."""

import logging
import time
from fractions import Fraction
from typing import List, Optional

from .activity import compute_granular, compute_histogram, compute_region_boundaries
from .constants import THRESHOLD_FRACTION
from .errors import InvalidCount, TooManyRegions, UsageError
from .metrics import metric_report
from .models import (
    ActivityReport,
    Frame,
    FrameSequence,
    PipelineConfig,
    PipelineResult,
    Verdict,
)
from .wavelet import denoise

logger = logging.getLogger(__name__)


def default_threshold(n_pixels: int, n_frames: int) -> float:
    return THRESHOLD_FRACTION * n_pixels / n_frames


def resolve_threshold(seq: FrameSequence, cfg: PipelineConfig) -> float:
    if cfg.activity_threshold is not None:
        return cfg.activity_threshold
    return default_threshold(seq.n_pixels, seq.count)


def decide_denoise(report: ActivityReport, threshold: float) -> Verdict:
    """De-noise only when the activity index strictly exceeds the threshold."""
    if report.activity_fraction > Fraction(threshold):
        return Verdict.DENOISED
    return Verdict.SPECKLE_FREE


def run_pipeline(
    seq: FrameSequence,
    cfg: Optional[PipelineConfig] = None,
    clean_ref: Optional[Frame] = None,
    force: bool = False,
) -> PipelineResult:
    """
    Histogram, regions, granular count, threshold gate and wavelet stage.

    Args:
        seq: frames of one scene
        cfg: pipeline settings, defaults when omitted
        clean_ref: noiseless reference; enables the metric report
        force: de-noise even when the gate says speckle free

    Returns:
        PipelineResult with per-stage wall-clock timing in seconds

    Raises:
        TooManyRegions: with a hint to lower Z
    """
    cfg = cfg or PipelineConfig()
    timing = {}

    started = time.perf_counter()
    histogram = compute_histogram(seq, cfg.hist_scope)
    timing["histogram"] = time.perf_counter() - started

    started = time.perf_counter()
    try:
        partition = compute_region_boundaries(histogram, cfg.z)
    except TooManyRegions as e:
        raise TooManyRegions(f"{e}; lower Z (currently {cfg.z})") from e
    timing["regions"] = time.perf_counter() - started

    started = time.perf_counter()
    _, report = compute_granular(seq, partition, cfg.register_width)
    timing["granular"] = time.perf_counter() - started

    threshold = resolve_threshold(seq, cfg)
    verdict = decide_denoise(report, threshold)
    forced = False
    if verdict == Verdict.SPECKLE_FREE and force:
        logger.warning(
            f"Activity index {report.activity_index:.6g} <= {threshold:.6g}; "
            "de-noising anyway (forced)"
        )
        verdict = Verdict.DENOISED
        forced = True

    denoised_frames = None
    if verdict == Verdict.DENOISED:
        started = time.perf_counter()
        denoised_frames = FrameSequence.of(
            [
                denoise(frame, cfg.wavelet_levels, cfg.threshold_spec, cfg.homomorphic)
                for frame in seq.frames
            ]
        )
        timing["denoise"] = time.perf_counter() - started
        logger.info(f"De-noised {seq.count} frames")
    else:
        logger.info("image is speckle free")

    metrics = None
    if clean_ref is not None:
        index = cfg.metrics_frame_index
        if index >= seq.count:
            raise UsageError(
                f"metrics frame index {index} out of range for {seq.count} frames"
            )
        noisy = seq.frames[index]
        restored = denoised_frames.frames[index] if denoised_frames else noisy
        started = time.perf_counter()
        metrics = metric_report(clean_ref, noisy, restored)
        timing["metrics"] = time.perf_counter() - started

    return PipelineResult(
        report=report,
        partition=partition,
        verdict=verdict,
        threshold=threshold,
        forced=forced,
        denoised_frames=denoised_frames,
        metrics=metrics,
        timing=timing,
    )


def run_batches(
    seq: FrameSequence,
    cfg: Optional[PipelineConfig] = None,
    batch_size: Optional[int] = None,
    clean_ref: Optional[Frame] = None,
    force: bool = False,
) -> List[PipelineResult]:
    """Run the pipeline on consecutive, non-overlapping groups of frames."""
    if batch_size is None:
        return [run_pipeline(seq, cfg, clean_ref, force)]
    if batch_size < 1:
        raise InvalidCount(f"batch size must be at least 1, got {batch_size}")
    results = []
    for start in range(0, seq.count, batch_size):
        group = FrameSequence.of(seq.frames[start : start + batch_size])
        logger.info(f"Processing frames {start}..{start + group.count - 1}")
        results.append(run_pipeline(group, cfg, clean_ref, force))
    return results
