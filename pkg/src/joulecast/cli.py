"""Command-line front end: simulate, analyze, fit, predict, report.

Exit codes are a stable contract for scripting:
0 success, 2 input error, 3 segmentation or labeling error,
4 numerical error, 5 missing-model error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from ._kvconfig import as_float, as_int, parse_kv
from .errors import (
    ConfigError,
    DomainError,
    IllConditionedError,
    IncompleteModelError,
    InsufficientDataError,
    JoulecastError,
    LabelingError,
    NumericalError,
    ResolutionError,
    TraceRangeError,
    UnderdeterminedError,
)
from .predictor import OperationKind, UnitaryModelSet, load_workload, predict
from .regression import FitResult, evaluate_fit, fit_inverse_power, select_degree
from .segmentation import (
    PhaseLabel,
    SegmentationConfig,
    detect_steps,
    label_phases,
    parse_labels,
    segments_to_csv,
    step_function_trace,
    unitary_metrics,
)
from .synthgen import PhaseSchedule, generate_trace
from .trace import (
    IDENTITY_CALIBRATION,
    calibrate,
    load_calibration,
    parse_trace_csv,
    power_trace_to_csv,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SEGMENTATION = 3
EXIT_NUMERICAL = 4
EXIT_MODEL = 5

_INPUT_ERRORS = (ConfigError, DomainError, TraceRangeError, ResolutionError, OSError)
_NUMERICAL_ERRORS = (IllConditionedError, NumericalError, UnderdeterminedError)


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _cmd_simulate(args) -> int:
    try:
        schedule = PhaseSchedule.from_json(_read_text(args.schedule))
    except _INPUT_ERRORS as exc:
        return _fail(EXIT_INPUT, str(exc))
    try:
        result = generate_trace(schedule, seed=args.seed)
    except (ResolutionError, ValueError) as exc:
        return _fail(EXIT_INPUT, str(exc))

    Path(args.out).write_text(power_trace_to_csv(result.trace), encoding="utf-8")
    truth = {
        "segments": [
            {"start": s.start, "end": s.end, "level": s.level, "label": str(s.label)}
            for s in result.segments
        ],
        "analytic_energy_joules": result.analytic_energy,
        "sample_rate": schedule.sample_rate,
        "noise_sigma": schedule.noise_sigma,
        "seed": schedule.seed if args.seed is None else args.seed,
    }
    Path(args.truth).write_text(json.dumps(truth, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {args.out} ({len(result.trace)} samples) and {args.truth}")
    return EXIT_OK


def _load_power_trace(trace_path: str, calibration_path: str | None):
    raw = parse_trace_csv(_read_text(trace_path), source_label=trace_path)
    if calibration_path is None:
        cal = IDENTITY_CALIBRATION  # trace file already holds watts
    else:
        cal = load_calibration(_read_text(calibration_path))
    return calibrate(raw, cal)


def _segmentation_config(path: str) -> SegmentationConfig:
    entries = parse_kv(_read_text(path))
    known = {"min_segment_duration", "level_change_threshold", "smoothing_window"}
    unknown = entries.keys() - known
    if unknown:
        raise ConfigError(f"unknown segmentation keys: {sorted(unknown)}")
    try:
        return SegmentationConfig(
            min_segment_duration=as_float(entries, "min_segment_duration"),
            level_change_threshold=as_float(entries, "level_change_threshold"),
            smoothing_window=(
                as_int(entries, "smoothing_window") if "smoothing_window" in entries else 5
            ),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _cmd_analyze(args) -> int:
    try:
        trace = _load_power_trace(args.trace, args.calibration)
        config = _segmentation_config(args.config)
        labels = parse_labels(args.labels) if args.labels else None
        unitary = _parse_unitary(args.unitary) if args.unitary else None
    except (JoulecastError, ValueError, OSError) as exc:
        return _fail(EXIT_INPUT, str(exc))

    try:
        segments = detect_steps(trace, config)
        if labels is not None:
            segments = label_phases(segments, labels)
    except LabelingError as exc:
        return _fail(
            EXIT_SEGMENTATION,
            f"{exc} (re-run with a different segmentation config or label list)",
        )
    except InsufficientDataError as exc:
        return _fail(EXIT_SEGMENTATION, str(exc))

    Path(args.out).write_text(segments_to_csv(segments), encoding="utf-8")
    print(f"wrote {len(segments)} segments to {args.out}")

    if args.step_out:
        step = step_function_trace(segments, trace)
        Path(args.step_out).write_text(power_trace_to_csv(step), encoding="utf-8")

    if unitary is not None:
        size, ops = unitary
        baseline = _baseline_level(segments)
        op_labels = {
            PhaseLabel.COPY_H2D,
            PhaseLabel.SUM,
            PhaseLabel.PRODUCT,
            PhaseLabel.COPY_D2H,
        }
        metrics = [
            unitary_metrics(seg, op_count=ops, vector_size=size, baseline=baseline)
            for seg in segments
            if seg.label in op_labels
        ]
        doc = [
            {
                "operation": str(m.operation),
                "vector_size": m.vector_size,
                "unitary_time": m.unitary_time,
                "unitary_power": m.unitary_power,
            }
            for m in metrics
        ]
        out = args.unitary_out or str(Path(args.out).with_suffix(".unitary.json"))
        Path(out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        print(f"wrote unitary metrics for {len(metrics)} segments to {out}")
    return EXIT_OK


def _parse_unitary(spec: str) -> tuple[int, int]:
    entries = dict(
        part.split("=", 1) if "=" in part else (part, "") for part in spec.split(",")
    )
    if set(entries) != {"n", "ops"}:
        raise ConfigError(f"--unitary expects n=SIZE,ops=COUNT, got {spec!r}")
    try:
        size, ops = int(entries["n"]), int(entries["ops"])
    except ValueError:
        raise ConfigError(f"--unitary values must be integers, got {spec!r}") from None
    if size < 1 or ops < 1:
        raise ConfigError("--unitary values must be at least 1")
    return size, ops


def _baseline_level(segments) -> float:
    for wanted in (PhaseLabel.STANDBY, PhaseLabel.IDLE):
        for seg in segments:
            if seg.label == wanted:
                return seg.level
    print("warning: no standby or idle segment; using baseline 0 W", file=sys.stderr)
    return 0.0


def _parse_points_csv(text: str) -> tuple[list[float], list[float]]:
    """Two-column (x, y) rows, optional header; x need not be sorted."""
    xs: list[float] = []
    ys: list[float] = []
    header_allowed = True
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ConfigError(f"line {lineno}: expected 2 fields, got {len(parts)}")
        try:
            x, y = float(parts[0]), float(parts[1])
        except ValueError:
            if header_allowed:
                header_allowed = False
                continue
            raise ConfigError(f"line {lineno}: malformed numeric field") from None
        header_allowed = False
        xs.append(x)
        ys.append(y)
    if len(xs) < 2:
        raise ConfigError(f"need at least 2 point rows, found {len(xs)}")
    return xs, ys


def _cmd_fit(args) -> int:
    if (args.degree is None) == (args.auto is None):
        return _fail(EXIT_INPUT, "exactly one of --degree or --auto is required")
    try:
        xs, ys = _parse_points_csv(_read_text(args.points))
    except (JoulecastError, OSError) as exc:
        return _fail(EXIT_INPUT, str(exc))

    try:
        if args.degree is not None:
            fit = fit_inverse_power(xs, ys, args.degree)
        else:
            try:
                max_degree_text, threshold_text = args.auto.split(",")
                max_degree, threshold = int(max_degree_text), float(threshold_text)
            except ValueError:
                return _fail(EXIT_INPUT, f"--auto expects N_MAX,R2 got {args.auto!r}")
            fit = select_degree(xs, ys, max_degree, threshold)
    except IllConditionedError as exc:
        return _fail(EXIT_NUMERICAL, str(exc))
    except _NUMERICAL_ERRORS as exc:
        return _fail(EXIT_NUMERICAL, str(exc))
    except (DomainError, ValueError) as exc:
        return _fail(EXIT_INPUT, str(exc))

    Path(args.out).write_text(fit.to_json(), encoding="utf-8")
    print(f"degree = {fit.degree}")
    print(f"R^2 = {fit.r_squared!r}")
    return EXIT_OK


_MODEL_FILES = {
    (metric, kind): f"{metric}_{kind}.json"
    for metric in ("time", "power")
    for kind in OperationKind
}


def _cmd_predict(args) -> int:
    try:
        workload = load_workload(_read_text(args.workload))
    except (JoulecastError, OSError) as exc:
        return _fail(EXIT_INPUT, str(exc))

    models_dir = Path(args.models)
    time_fits: dict[OperationKind, FitResult] = {}
    power_fits: dict[OperationKind, FitResult] = {}
    for kind in OperationKind:
        if workload.counts[kind] == 0:
            continue
        for metric, store in (("time", time_fits), ("power", power_fits)):
            path = models_dir / _MODEL_FILES[(metric, kind)]
            if not path.exists():
                return _fail(
                    EXIT_MODEL,
                    f"workload uses {workload.counts[kind]} {kind} operations but "
                    f"{path} is missing",
                )
            try:
                store[kind] = FitResult.from_json(path.read_text(encoding="utf-8"))
            except ConfigError as exc:
                return _fail(EXIT_INPUT, f"{path}: {exc}")

    try:
        prediction = predict(workload, UnitaryModelSet(time_fits, power_fits))
    except IncompleteModelError as exc:
        return _fail(EXIT_MODEL, str(exc))
    except DomainError as exc:
        return _fail(EXIT_INPUT, str(exc))

    Path(args.out).write_text(prediction.to_json(), encoding="utf-8")
    print(f"total time = {prediction.total_time!r} s")
    print(f"total energy = {prediction.total_energy!r} J")
    for warning in prediction.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return EXIT_OK


def _cmd_report(args) -> int:
    try:
        fit = FitResult.from_json(_read_text(args.fit))
    except (ConfigError, OSError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    try:
        start_text, stop_text, step_text = args.range.split(":")
        start, stop, step = float(start_text), float(stop_text), float(step_text)
    except ValueError:
        return _fail(EXIT_INPUT, f"--range expects A:B:STEP, got {args.range!r}")
    if not start > 0:
        return _fail(EXIT_INPUT, "range start must be positive")
    if not step > 0:
        return _fail(EXIT_INPUT, "range step must be positive")
    if stop < start:
        return _fail(EXIT_INPUT, "range end must not precede its start")

    count = int((stop - start) / step + 1e-12) + 1
    lines = ["x,value"]
    for i in range(count):
        x = start + i * step
        lines.append(f"{x!r},{evaluate_fit(fit, x)!r}")
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {count} rows to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="joulecast",
        description="Analyze GPU power traces and predict program time and energy.",
    )
    parser.add_argument(
        "--version", action="version", version=f"joulecast {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic trace from a schedule")
    p.add_argument("--schedule", required=True, help="schedule JSON file")
    p.add_argument("--out", required=True, help="output trace CSV")
    p.add_argument("--truth", required=True, help="output ground-truth JSON")
    p.add_argument("--seed", type=int, default=None, help="override the schedule seed")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analyze", help="segment a trace and label its phases")
    p.add_argument("--trace", required=True, help="trace CSV (time,volts or time,watts)")
    p.add_argument(
        "--calibration",
        default=None,
        help="clamp calibration key=value file; omit when the trace is already in watts",
    )
    p.add_argument("--config", required=True, help="segmentation key=value file")
    p.add_argument("--labels", default=None, help="comma-separated phase labels")
    p.add_argument("--out", required=True, help="output segments CSV")
    p.add_argument("--step-out", default=None, help="optional step-function trace CSV")
    p.add_argument("--unitary", default=None, metavar="n=SIZE,ops=K",
                   help="also emit per-element metrics for operation segments")
    p.add_argument("--unitary-out", default=None, help="unitary metrics JSON path")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("fit", help="fit an inverse-power model to (x,y) points")
    p.add_argument("--points", required=True, help="CSV of x,y rows")
    p.add_argument("--degree", type=int, default=None, help="fixed model degree")
    p.add_argument("--auto", default=None, metavar="N_MAX,R2",
                   help="pick the smallest degree reaching the R^2 threshold")
    p.add_argument("--out", required=True, help="output fit JSON")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("predict", help="predict totals for a workload")
    p.add_argument("--workload", required=True, help="workload key=value file")
    p.add_argument("--models", required=True,
                   help="directory holding {time,power}_{copy,sum,product}.json fits")
    p.add_argument("--out", required=True, help="output prediction JSON")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("report", help="sample a fitted curve for plotting")
    p.add_argument("--fit", required=True, help="fit JSON file")
    p.add_argument("--range", required=True, metavar="A:B:STEP", help="sampling grid")
    p.add_argument("--out", required=True, help="output CSV of x,value rows")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:  # unreadable input or unwritable output path
        return _fail(EXIT_INPUT, str(exc))
    except JoulecastError as exc:  # uncategorized package error: input contract
        return _fail(EXIT_INPUT, str(exc))


if __name__ == "__main__":
    sys.exit(main())
