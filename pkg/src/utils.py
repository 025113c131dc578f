"""Config files, input expansion, report and CSV encoding helpers."""

import csv
import glob
import io
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

from .constants import APP_VERSION
from .errors import MissingFile, UsageError
from .models import (
    ActivityReport,
    Histogram,
    HwReport,
    MetricReport,
    PipelineConfig,
    RegionPartition,
    RunManifest,
    Verdict,
)

logger = logging.getLogger(__name__)

GLOB_CHARS = set("*?[")


def expand_inputs(patterns: Sequence[str]) -> List[str]:
    """
    Expand glob patterns; matches of each pattern are sorted lexicographically.

    Plain paths are kept as given, in order.

    Raises:
        MissingFile: a pattern matches nothing
    """
    paths: List[str] = []
    for pattern in patterns:
        if GLOB_CHARS & set(pattern):
            matches = sorted(glob.glob(pattern))
            if not matches:
                raise MissingFile(f"no files match {pattern!r}")
            paths.extend(matches)
        else:
            paths.append(pattern)
    return paths


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, str]:
    """Parse ``key=value`` lines; '#' starts a comment, '-' in keys becomes '_'."""
    values = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{source}:{number}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip().lstrip("-").replace("-", "_")
        if not key:
            raise UsageError(f"{source}:{number}: empty key")
        values[key] = value.strip()
    return values


def read_config_file(path: str) -> Dict[str, str]:
    config_path = Path(path)
    if not config_path.is_file():
        raise MissingFile(f"no such config file: {config_path}")
    logger.info(f"Reading configuration from {config_path}")
    return parse_config_text(config_path.read_text(), source=str(config_path))


def parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {value!r}")


def build_manifest(
    config: PipelineConfig,
    inputs: Iterable[str] = (),
    seed: Optional[int] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> RunManifest:
    snapshot = config.model_dump(mode="json")
    if extra:
        snapshot.update(extra)
    return RunManifest(
        config=snapshot,
        inputs=[str(path) for path in inputs],
        seed=seed,
        tool_version=APP_VERSION,
        started_at=datetime.now(timezone.utc).isoformat(),
    )


def activity_payload(report: ActivityReport, partition: RegionPartition) -> Dict[str, Any]:
    return {
        "granular_count": report.granular_count,
        "activity_index": report.activity_index,
        "per_region_granules": list(report.per_region_granules),
        "frames_used": report.frames_used,
        "z": partition.z,
        "regions": [[lo, hi] for lo, hi in partition.regions],
    }


def build_report(
    manifest: Optional[RunManifest],
    report: ActivityReport,
    partition: RegionPartition,
    verdict: Verdict,
    metrics: Optional[MetricReport] = None,
    hw: Optional[HwReport] = None,
    **extra: Any,
) -> Dict[str, Any]:
    """JSON report: manifest, activity, verdict and optional metrics / hw sections."""
    payload: Dict[str, Any] = {}
    if manifest is not None:
        payload["manifest"] = manifest.model_dump(mode="json")
    payload["activity"] = activity_payload(report, partition)
    payload["verdict"] = verdict.value
    if metrics is not None:
        payload["metrics"] = metrics.model_dump(mode="json")
    if hw is not None:
        payload["hw"] = hw.model_dump(mode="json")
    payload.update(extra)
    return payload


def histogram_payload(histogram: Histogram) -> Dict[str, Any]:
    return {"bins": list(histogram.bins), "probabilities": histogram.probabilities()}


def dump_json(payload: Any) -> str:
    return json.dumps(payload, indent=2)


def format_number(value: Any) -> str:
    """Locale-independent rendering; infinities become "inf"."""
    if isinstance(value, float):
        if value == float("inf"):
            return "inf"
        return repr(value)
    return str(value)


def write_csv(header: Sequence[str], rows: Iterable[Dict[str, Any]]) -> str:
    """CSV text with LF line endings and an always-present header row."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(row[column]) for column in header])
    return buffer.getvalue()
