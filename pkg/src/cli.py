"""Command-line front end: detect, denoise, synth, bench and metrics.

Exit codes:
    0   success (``detect``: image is speckle free)
    1   ``detect`` only: speckle detected
    64  usage error
    65  data error (malformed frames, size mismatch, too many regions)
    66  I/O error
    70  internal error (stream/batch mismatch)
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from pydantic import ValidationError

from .activity import analyze, compute_histogram
from .constants import (
    APP_NAME,
    APP_VERSION,
    BENCH_FRAMES,
    BENCH_POINTS,
    BENCH_SEEDS,
    BENCH_VARIANCE_MAX,
    BENCH_VARIANCE_MIN,
    DEFAULT_SEED,
    DENOISED_SUFFIX,
    BENCH_MANIFEST_NAME,
    REPORT_NAME,
    SWEEP_FRACTIONS,
)
from .errors import (
    EquivalenceError,
    IoFailure,
    SpeckleError,
    TooManyRegions,
    UsageError,
)
from .frame_io import load_frame, load_sequence, save_frame
from .hwsim import TraceWriter, hw_verdict, stream_run
from .metrics import metric_report
from .models import (
    FrameSequence,
    NoiseDistribution,
    PipelineConfig,
    SpeckleParams,
    ThresholdSpec,
    Verdict,
)
from .noise import noise_sequence
from .pipeline import decide_denoise, resolve_threshold, run_batches
from .services import bench_variances, run_bench
from .utils import (
    build_manifest,
    build_report,
    dump_json,
    histogram_payload,
    expand_inputs,
    parse_bool,
    read_config_file,
    write_csv,
)

logger = logging.getLogger(__name__)

# settings that may come from --config files or flags, with their parsers
SETTINGS: Dict[str, Callable[[str], Any]] = {
    "z": int,
    "threshold": float,
    "levels": int,
    "shrink": str,
    "rule": str,
    "manual_t": float,
    "hist_scope": str,
    "homomorphic": parse_bool,
    "seed": int,
    "register_width": int,
    "png": parse_bool,
    "hw": parse_bool,
    "trace": str,
    "out_dir": str,
    "json": parse_bool,
}


class ArgumentParser(argparse.ArgumentParser):
    """Reports usage problems as UsageError instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(message)


def resolve_settings(args: argparse.Namespace) -> Dict[str, Any]:
    """Built-in defaults < --config file < flags."""
    settings: Dict[str, Any] = {}
    if getattr(args, "config", None):
        for key, raw in read_config_file(args.config).items():
            if key not in SETTINGS:
                raise UsageError(f"unknown config key {key!r}")
            try:
                settings[key] = SETTINGS[key](raw)
            except ValueError:
                raise UsageError(f"invalid value for {key!r}: {raw!r}")
    for key in SETTINGS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def build_config(settings: Dict[str, Any]) -> PipelineConfig:
    spec_fields = {
        "mode": settings.get("shrink"),
        "rule": settings.get("rule"),
        "manual_value": settings.get("manual_t"),
    }
    config_fields = {
        "z": settings.get("z"),
        "activity_threshold": settings.get("threshold"),
        "wavelet_levels": settings.get("levels"),
        "hist_scope": settings.get("hist_scope"),
        "homomorphic": settings.get("homomorphic"),
        "register_width": settings.get("register_width"),
    }
    try:
        spec = ThresholdSpec(**{k: v for k, v in spec_fields.items() if v is not None})
        return PipelineConfig(
            threshold_spec=spec,
            **{k: v for k, v in config_fields.items() if v is not None},
        )
    except ValidationError as e:
        raise UsageError(f"invalid configuration: {e}")


def _prepare_out_dir(settings: Dict[str, Any]) -> Path:
    out_dir = Path(settings.get("out_dir") or ".")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoFailure(f"cannot create output directory {out_dir}: {e}")
    return out_dir


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, newline="\n")
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}")


def _groups(seq: FrameSequence, batch_size: Optional[int]) -> List[FrameSequence]:
    if batch_size is None:
        return [seq]
    if batch_size < 1:
        raise UsageError(f"--batch-size must be at least 1, got {batch_size}")
    return [
        FrameSequence.of(seq.frames[start : start + batch_size])
        for start in range(0, seq.count, batch_size)
    ]


def _warn_ignored(settings: Dict[str, Any], command: str) -> None:
    if command == "detect":
        if settings.get("trace") and not settings.get("hw"):
            logger.warning("--trace has no effect on detect without --hw")
        return
    for key in ("hw", "trace"):
        if settings.get(key):
            logger.warning(f"--{key} has no effect on {command}")


def _output_names(paths: Sequence[str]) -> List[str]:
    """Denoised file names; distinct inputs sharing a stem would overwrite each other."""
    names = [Path(path).stem + DENOISED_SUFFIX for path in paths]
    seen: Dict[str, str] = {}
    for path, name in zip(paths, names):
        if name in seen:
            raise UsageError(
                f"{seen[name]} and {path} would both be written as {name}; "
                "rename one of the inputs"
            )
        seen[name] = path
    return names


def _trace_path(trace: str, index: int, total: int) -> Path:
    path = Path(trace)
    if total == 1:
        return path
    return path.with_name(f"{path.stem}.{index}{path.suffix}")


def _detect_group(seq: FrameSequence, cfg: PipelineConfig, hw: bool, trace: Optional[Path]):
    # with --hw the register width is enforced by the emulated MEM_FLAGS
    width = None if hw else cfg.register_width
    try:
        partition, _, report = analyze(seq, cfg.z, cfg.hist_scope, width)
    except TooManyRegions as e:
        raise TooManyRegions(f"{e}; lower Z (currently {cfg.z})") from e
    threshold = resolve_threshold(seq, cfg)
    hw_report = None
    if hw:
        if trace is not None:
            with TraceWriter(trace) as tracer:
                stream_report, hw_report = stream_run(seq, cfg, tracer)
            logger.info(f"Wrote cycle trace to {trace}")
        else:
            stream_report, hw_report = stream_run(seq, cfg)
        if stream_report != report:
            raise EquivalenceError(
                f"stream report {stream_report.model_dump()} differs from "
                f"batch report {report.model_dump()}"
            )
        verdict = hw_verdict(report.granular_count, seq.count, threshold)
    else:
        verdict = decide_denoise(report, threshold)
    return report, partition, verdict, threshold, hw_report


def _sweep(seq: FrameSequence, report) -> List[Dict[str, Any]]:
    ceiling = seq.n_pixels * (seq.count - 1) / seq.count
    return [
        {
            "threshold": fraction * ceiling,
            "activity_index": report.activity_index,
            "verdict": decide_denoise(report, fraction * ceiling).value,
        }
        for fraction in SWEEP_FRACTIONS
    ]


def _print_console(report, verdict: Verdict, threshold: float) -> None:
    print(f"granular_count = {report.granular_count}")
    print(f"activity_index = {report.activity_index:g}")
    if verdict == Verdict.SPECKLE_FREE:
        print("image is speckle free")
    else:
        print(f"speckle detected (activity index above threshold {threshold:g})")


def cmd_detect(args: argparse.Namespace) -> int:
    settings = resolve_settings(args)
    _warn_ignored(settings, "detect")
    cfg = build_config(settings)
    if not args.paths:
        raise UsageError("detect needs at least one frame path")
    paths = expand_inputs(args.paths)
    seq = load_sequence(paths, allow_png=settings.get("png", False))
    manifest = build_manifest(
        cfg,
        paths,
        settings.get("seed"),
        extra={
            "batch_size": args.batch_size,
            "hw": bool(settings.get("hw", False)),
            "sweep_threshold": args.sweep_threshold,
        },
    )

    groups = _groups(seq, args.batch_size)
    trace = settings.get("trace")
    detected = False
    payloads = []
    for index, group in enumerate(groups):
        trace_path = _trace_path(trace, index, len(groups)) if trace else None
        report, partition, verdict, threshold, hw_report = _detect_group(
            group, cfg, settings.get("hw", False), trace_path
        )
        detected = detected or verdict == Verdict.DENOISED
        extra = {"threshold": threshold}
        if args.sweep_threshold:
            extra["sweep"] = _sweep(group, report)
        if args.histogram:
            extra["histogram"] = histogram_payload(compute_histogram(group, cfg.hist_scope))
        payloads.append(
            build_report(manifest, report, partition, verdict, hw=hw_report, **extra)
        )
        if not settings.get("json"):
            if len(groups) > 1:
                first = index * args.batch_size
                print(f"# frames {first}..{first + group.count - 1}")
            _print_console(report, verdict, threshold)
            if args.sweep_threshold:
                print("threshold\tactivity_index\tverdict")
                for row in extra["sweep"]:
                    print(
                        f"{row['threshold']:g}\t{row['activity_index']:g}\t"
                        f"{row['verdict']}"
                    )

    if settings.get("json"):
        print(dump_json(payloads[0] if len(payloads) == 1 else payloads))
    return 1 if detected else 0


def cmd_denoise(args: argparse.Namespace) -> int:
    settings = resolve_settings(args)
    _warn_ignored(settings, "denoise")
    cfg = build_config(settings)
    if not args.paths:
        raise UsageError("denoise needs at least one frame path")
    paths = expand_inputs(args.paths)
    names = _output_names(paths)
    allow_png = settings.get("png", False)
    seq = load_sequence(paths, allow_png=allow_png)
    clean_ref = load_frame(args.clean, allow_png=allow_png) if args.clean else None
    out_dir = _prepare_out_dir(settings)
    manifest = build_manifest(
        cfg,
        paths,
        settings.get("seed"),
        extra={"force": args.force, "batch_size": args.batch_size},
    )

    if args.batch_size is not None and args.batch_size < 1:
        raise UsageError(f"--batch-size must be at least 1, got {args.batch_size}")
    results = run_batches(seq, cfg, args.batch_size, clean_ref, force=args.force)
    payloads = []
    start = 0
    for index, result in enumerate(results):
        count = result.report.frames_used
        group_names = names[start : start + count]
        start += count
        outputs = []
        if result.denoised_frames is not None:
            for name, frame in zip(group_names, result.denoised_frames.frames):
                target = out_dir / name
                save_frame(frame, target)
                outputs.append(str(target))
            logger.info(f"Wrote {len(outputs)} denoised frames to {out_dir}")
        payload = build_report(
            manifest,
            result.report,
            result.partition,
            result.verdict,
            metrics=result.metrics,
            threshold=result.threshold,
            forced=result.forced,
            outputs=outputs,
        )
        name = REPORT_NAME if len(results) == 1 else f"report-{index}.json"
        _write_text(out_dir / name, dump_json(payload) + "\n")
        payloads.append(payload)

    if settings.get("json"):
        print(dump_json(payloads[0] if len(payloads) == 1 else payloads))
    else:
        for payload in payloads:
            print(f"verdict = {payload['verdict']}, outputs = {len(payload['outputs'])}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    settings = resolve_settings(args)
    _warn_ignored(settings, "synth")
    cfg = build_config(settings)
    seed = settings.get("seed", DEFAULT_SEED)
    distribution = (
        NoiseDistribution.GAUSSIAN if args.gaussian_speckle else NoiseDistribution.UNIFORM
    )
    try:
        params = SpeckleParams(variance=args.variance, seed=seed, distribution=distribution)
    except ValidationError as e:
        raise UsageError(f"invalid noise parameters: {e}")
    if args.frames < 1:
        raise UsageError(f"--frames must be at least 1, got {args.frames}")

    clean = load_frame(args.clean, allow_png=settings.get("png", False))
    out_dir = _prepare_out_dir(settings)
    seq = noise_sequence(clean, params, args.frames)
    stem = Path(args.clean).stem
    outputs = []
    for index, frame in enumerate(seq.frames):
        target = out_dir / f"{stem}.{index:03d}.pgm"
        save_frame(frame, target)
        outputs.append(str(target))

    manifest = build_manifest(
        cfg,
        [args.clean],
        seed,
        extra={
            "variance": args.variance,
            "frames": args.frames,
            "distribution": distribution.value,
        },
    )
    _write_text(
        out_dir / "synth_manifest.json",
        dump_json({"manifest": manifest.model_dump(mode="json"), "outputs": outputs})
        + "\n",
    )
    print("\n".join(outputs))
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    settings = resolve_settings(args)
    _warn_ignored(settings, "bench")
    cfg = build_config(settings)
    seed = settings.get("seed", DEFAULT_SEED)
    if args.variances:
        try:
            variances = [float(v) for v in args.variances.split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"invalid --variances list {args.variances!r}")
    else:
        if not 0 < args.vmin <= args.vmax:
            raise UsageError(
                f"need 0 < --vmin <= --vmax, got vmin={args.vmin} vmax={args.vmax}"
            )
        if args.points < 1:
            raise UsageError(f"--points must be at least 1, got {args.points}")
        variances = bench_variances(args.vmin, args.vmax, args.points)
    if not variances or any(v < 0 for v in variances):
        raise UsageError("variances must be a non-empty list of non-negative values")
    if args.seeds < 1 or args.frames < 1 or args.workers < 1:
        raise UsageError("--seeds, --frames and --workers must be at least 1")

    clean = load_frame(args.clean, allow_png=settings.get("png", False))
    columns, rows = run_bench(
        clean,
        cfg,
        variances,
        seeds=args.seeds,
        base_seed=seed,
        n_frames=args.frames,
        compare_filters=args.compare_filters,
        workers=args.workers,
    )
    text = write_csv(columns, rows)
    if args.output:
        _write_text(Path(args.output), text)
        logger.info(f"Wrote {len(rows)} rows to {args.output}")
    else:
        sys.stdout.write(text)

    manifest = build_manifest(
        cfg,
        [args.clean],
        seed,
        extra={
            "variances": variances,
            "seeds": args.seeds,
            "frames": args.frames,
            "compare_filters": args.compare_filters,
            "output": args.output,
        },
    )
    # next to the CSV unless --out-dir names a place
    if settings.get("out_dir") or not args.output:
        manifest_dir = _prepare_out_dir(settings)
    else:
        manifest_dir = Path(args.output).parent
    text = dump_json(manifest.model_dump(mode="json")) + "\n"
    _write_text(manifest_dir / BENCH_MANIFEST_NAME, text)
    return 0


def cmd_metrics(args: argparse.Namespace) -> int:
    settings = resolve_settings(args)
    _warn_ignored(settings, "metrics")
    allow_png = settings.get("png", False)
    clean, noisy, denoised = (
        load_frame(path, allow_png=allow_png)
        for path in (args.clean, args.noisy, args.denoised)
    )
    print(dump_json(metric_report(clean, noisy, denoised).model_dump(mode="json")))
    return 0


def _common_flags() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--z", type=int, help="region parameter Z (2Z-1 regions)")
    common.add_argument("--threshold", type=float, help="activity-index threshold")
    common.add_argument("--levels", type=int, help="wavelet decomposition depth")
    common.add_argument("--shrink", choices=["soft", "hard"])
    common.add_argument("--rule", choices=["universal", "manual"])
    common.add_argument(
        "--manual-t", dest="manual_t", type=float, help="manual threshold value"
    )
    common.add_argument("--hist-scope", dest="hist_scope", choices=["sequence", "first-frame"])
    common.add_argument("--homomorphic", action="store_true", default=None)
    common.add_argument("--seed", type=int)
    common.add_argument("--register-width", dest="register_width", type=int,
                        help="MEM_FLAGS counter width L for --hw")
    common.add_argument("--hw", action="store_true", default=None,
                        help="run the streaming hardware emulation")
    common.add_argument("--trace", help="TSV cycle trace path (with --hw)")
    common.add_argument("--config", help="key=value configuration file")
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--json", action="store_true", default=None)
    common.add_argument("--png", action="store_true", default=None,
                        help="accept PNG input, converted to 8-bit grayscale")
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("-q", "--quiet", action="store_true")
    return common


def build_parser() -> ArgumentParser:
    common = _common_flags()
    parser = ArgumentParser(
        prog=APP_NAME, description="Speckle activity detection and de-noising"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {APP_VERSION}")
    commands = parser.add_subparsers(dest="command", required=True)

    detect = commands.add_parser("detect", parents=[common], help="activity index and verdict")
    detect.add_argument("paths", nargs="*")
    detect.add_argument("--sweep-threshold", dest="sweep_threshold", action="store_true")
    detect.add_argument("--batch-size", dest="batch_size", type=int)
    detect.add_argument(
        "--histogram", action="store_true", help="add the histogram to the JSON report"
    )
    detect.set_defaults(handler=cmd_detect)

    denoise = commands.add_parser("denoise", parents=[common], help="gate and de-noise")
    denoise.add_argument("paths", nargs="*")
    denoise.add_argument("--force", action="store_true", help="always de-noise")
    denoise.add_argument("--clean", help="noiseless reference frame for metrics")
    denoise.add_argument("--batch-size", dest="batch_size", type=int)
    denoise.set_defaults(handler=cmd_denoise)

    synth = commands.add_parser("synth", parents=[common], help="synthesize speckled frames")
    synth.add_argument("clean")
    synth.add_argument("--variance", type=float, required=True)
    synth.add_argument("--frames", type=int, default=BENCH_FRAMES)
    synth.add_argument("--gaussian-speckle", dest="gaussian_speckle", action="store_true")
    synth.set_defaults(handler=cmd_synth)

    bench = commands.add_parser("bench", parents=[common], help="noise-variance sweep as CSV")
    bench.add_argument("clean")
    bench.add_argument("--variances", help="comma-separated variance list")
    bench.add_argument("--vmin", type=float, default=BENCH_VARIANCE_MIN)
    bench.add_argument("--vmax", type=float, default=BENCH_VARIANCE_MAX)
    bench.add_argument("--points", type=int, default=BENCH_POINTS)
    bench.add_argument("--seeds", type=int, default=BENCH_SEEDS)
    bench.add_argument("--frames", type=int, default=BENCH_FRAMES)
    bench.add_argument("--compare-filters", dest="compare_filters", action="store_true")
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--output", help="CSV path, stdout when omitted")
    bench.set_defaults(handler=cmd_bench)

    metrics = commands.add_parser("metrics", parents=[common], help="MSE / PSNR / IEF report")
    metrics.add_argument("clean")
    metrics.add_argument("noisy")
    metrics.add_argument("denoised")
    metrics.set_defaults(handler=cmd_metrics)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.DEBUG)
        elif args.quiet:
            logging.getLogger().setLevel(logging.WARNING)
        return args.handler(args)
    except SpeckleError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        logger.error(f"Validation error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return UsageError.exit_code


if __name__ == "__main__":
    sys.exit(main())
