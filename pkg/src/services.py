import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from fastapi import HTTPException
from pydantic import BaseModel, Field, ValidationError

from .activity import analyze
from .constants import BENCH_POINTS, BENCH_VARIANCE_MAX, BENCH_VARIANCE_MIN
from .errors import SpeckleError
from .filters import BASELINES
from .metrics import metric_report, psnr
from .models import Frame, FrameSequence, PipelineConfig, SpeckleParams
from .noise import noise_sequence
from .pipeline import decide_denoise, resolve_threshold, run_pipeline
from .utils import build_report

logger = logging.getLogger(__name__)

BENCH_COLUMNS = [
    "variance",
    "seed",
    "mse1",
    "mse2",
    "psnr1",
    "psnr2",
    "psnr_clean_denoised",
    "ief",
    "activity_index",
]
FILTER_COLUMNS = [f"psnr_{name}" for name in BASELINES]


class DetectRequest(BaseModel):
    """Frames as nested ``[frame][row][column]`` intensity lists."""

    frames: List[List[List[int]]] = Field(..., min_length=1)
    config: Optional[PipelineConfig] = None


class MetricsRequest(BaseModel):
    clean: List[List[int]]
    noisy: List[List[int]]
    denoised: List[List[int]]


def _as_http_error(e: Exception) -> HTTPException:
    if isinstance(e, SpeckleError):
        logger.error(f"{type(e).__name__}: {e}")
        return HTTPException(status_code=e.http_status, detail=str(e))
    if isinstance(e, ValidationError):
        logger.error(f"Validation error: {e}")
        return HTTPException(status_code=422, detail=str(e))
    logger.error(f"Unexpected error: {e}")
    return HTTPException(status_code=500, detail="Internal server error")


class SpeckleService:
    """Detection and metric requests of the HTTP API."""

    def detect(self, seq: FrameSequence, cfg: PipelineConfig) -> Dict[str, Any]:
        partition, _, report = analyze(seq, cfg.z, cfg.hist_scope, cfg.register_width)
        threshold = resolve_threshold(seq, cfg)
        verdict = decide_denoise(report, threshold)
        return build_report(None, report, partition, verdict, threshold=threshold)

    def process_detect(self, request: DetectRequest) -> Dict[str, Any]:
        try:
            seq = FrameSequence.of([Frame(data=f) for f in request.frames])
            return self.detect(seq, request.config or PipelineConfig())
        except Exception as e:
            raise _as_http_error(e)

    def process_metrics(self, request: MetricsRequest) -> Dict[str, Any]:
        try:
            clean, noisy, denoised = (
                Frame(data=values)
                for values in (request.clean, request.noisy, request.denoised)
            )
            return metric_report(clean, noisy, denoised).model_dump(mode="json")
        except Exception as e:
            raise _as_http_error(e)


def bench_variances(
    vmin: float = BENCH_VARIANCE_MIN,
    vmax: float = BENCH_VARIANCE_MAX,
    points: int = BENCH_POINTS,
) -> List[float]:
    """Log-spaced variance grid."""
    if points == 1:
        return [float(vmax)]
    return [float(v) for v in np.geomspace(vmin, vmax, points)]


def run_bench_cell(
    clean: Frame,
    cfg: PipelineConfig,
    variance: float,
    seed: int,
    n_frames: int,
    compare_filters: bool = False,
) -> Dict[str, Any]:
    """Synthesize, run the forced pipeline and score one (variance, seed) cell."""
    seq = noise_sequence(clean, SpeckleParams(variance=variance, seed=seed), n_frames)
    result = run_pipeline(seq, cfg, clean_ref=clean, force=True)
    row = {"variance": variance, "seed": seed}
    row.update(result.metrics.model_dump())
    row["activity_index"] = result.report.activity_index
    if compare_filters:
        noisy = seq.frames[cfg.metrics_frame_index]
        for name, apply_filter in BASELINES.items():
            row[f"psnr_{name}"] = psnr(clean, apply_filter(noisy))
    return row


def _mean_row(variance: float, rows: Sequence[Dict[str, Any]], columns: Sequence[str]):
    mean = {"variance": variance, "seed": "mean"}
    for column in columns[2:]:
        mean[column] = float(np.mean([row[column] for row in rows]))
    return mean


def run_bench(
    clean: Frame,
    cfg: PipelineConfig,
    variances: Sequence[float],
    seeds: int,
    base_seed: int,
    n_frames: int,
    compare_filters: bool = False,
    workers: int = 1,
) -> Tuple[List[str], List[Dict[str, Any]]]:
    """
    Variance x seed sweep.

    Cell k of a variance uses seed ``base_seed + k * n_frames`` so the per-frame
    noise streams of different cells never overlap.

    Returns:
        column names, and rows sorted by variance then seed with one mean row
        after each variance
    """
    columns = BENCH_COLUMNS + (FILTER_COLUMNS if compare_filters else [])
    cells = [
        (variance, base_seed + k * n_frames)
        for variance in variances
        for k in range(seeds)
    ]
    logger.info(f"Running {len(cells)} bench cells with {workers} worker(s)")

    def run(cell):
        return run_bench_cell(clean, cfg, cell[0], cell[1], n_frames, compare_filters)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, cells))
    else:
        results = [run(cell) for cell in cells]

    rows: List[Dict[str, Any]] = []
    for variance in variances:
        group = sorted(
            (row for row in results if row["variance"] == variance),
            key=lambda row: row["seed"],
        )
        rows.extend(group)
        rows.append(_mean_row(variance, group, columns))
    return columns, rows
