"""Acceptance suite: one test per criterion, one printed line per result.

Run with `pytest -s tests/test_acceptance.py` to see the PASS/FAIL line
of every criterion as it completes. Each test pins its tolerances
inline; statistical criteria use fixed seeds so the suite is
deterministic.
"""

import json
import subprocess
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest

from joulecast import (
    FitResult,
    OperationKind,
    PhaseBudget,
    PowerTrace,
    SegmentationConfig,
    UnitaryModelSet,
    WorkloadSpec,
    compare_prediction,
    confidence_domain,
    detect_steps,
    evaluate_fit,
    fit_inverse_power,
    generate_trace,
    integrate_energy,
    label_phases,
    predict,
    schedule_from_workload,
    select_degree,
    six_level_schedule,
)
from joulecast.regression import build_design_matrix
from joulecast.segmentation import PhaseLabel

from conftest import POWER_COEFFS, TIME_COEFFS, TIME_R2, POWER_R2, reference_model


@contextmanager
def criterion(number, description):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {number}: FAIL - {description}")
        raise
    elapsed = time.perf_counter() - start
    print(f"\nACCEPTANCE {number}: PASS - {description} [{elapsed:.2f}s]")


GRID_50 = np.linspace(3.0, 7.0, 50)


def test_criterion_1_coefficient_reproduction():
    """Noiseless refits recover every reference time curve to 1e-6."""
    with criterion(1, "noiseless refits recover reference coefficients"):
        start = time.perf_counter()
        for degree, truth in TIME_COEFFS.items():
            ys = reference_model(truth, GRID_50)
            fit = fit_inverse_power(GRID_50, ys, degree)
            worst = np.max(np.abs((fit.coefficients - truth) / truth))
            assert worst <= 1e-6, f"degree {degree}: coefficient error {worst:.2e}"
            assert fit.r_squared >= 1.0 - 1e-10, f"degree {degree}: R^2 {fit.r_squared!r}"
        assert time.perf_counter() - start < 1.0


def _selection_experiment(truth, target_r2, runs, master_seed):
    """Noisy regenerations from the degree-5 curve on a [3, 12] grid.

    The noise level is derived, not tuned: matching the expected
    degree-5 R^2 to the reference value target_r2 gives
    sigma^2 = (1 - target_r2) * SST / dof. On this grid the degree-4
    approximation of the curve stays below the 0.999 threshold on its
    own, so the smallest degree reaching the threshold is 5.
    """
    xs = np.linspace(3.0, 12.0, 50)
    ys0 = reference_model(truth, xs)
    sst = float(np.sum((ys0 - ys0.mean()) ** 2))
    sigma = float(np.sqrt((1.0 - target_r2) * sst / (xs.size - 6)))
    rng = np.random.default_rng(master_seed)
    picks = []
    r5_values = []
    for _ in range(runs):
        ys = ys0 + rng.normal(0.0, sigma, xs.size)
        fit = select_degree(xs, ys, max_degree=6, r2_threshold=0.999)
        picks.append(fit.degree)
        r5_values.append(fit_inverse_power(xs, ys, 5).r_squared)
    return np.array(picks), float(np.mean(r5_values))


def test_criterion_2_degree_selection():
    """select_degree picks 5 in at least 95 of 100 seeded noisy runs."""
    with criterion(2, "degree selection lands on 5 under calibrated noise"):
        start = time.perf_counter()
        for label, truth, target in (
            ("time", TIME_COEFFS[5], TIME_R2[5]),
            ("power", POWER_COEFFS[5], POWER_R2[5]),
        ):
            picks, mean_r5 = _selection_experiment(truth, target, 100, 20240515)
            rate = float(np.mean(picks == 5))
            assert rate >= 0.95, f"{label}: degree-5 selection rate {rate:.2f}"
            # the noise calibration should land the degree-5 R^2 on the
            # reference value it was derived from
            assert mean_r5 == pytest.approx(target, abs=2e-4), (
                f"{label}: mean R^2 {mean_r5:.6f} vs reference {target}"
            )
        assert time.perf_counter() - start < 10.0


def test_criterion_3_pythagoras_relation():
    """Total dispersion splits into residual plus explained, 1e-8 relative."""
    with criterion(3, "Pythagoras relation holds on the fit corpus"):
        rng = np.random.default_rng(7)
        corpus = []
        for table in (TIME_COEFFS, POWER_COEFFS):
            for degree, truth in table.items():
                corpus.append((GRID_50, reference_model(truth, GRID_50), degree))
        for _ in range(20):
            degree = int(rng.integers(1, 6))
            scale = 10.0 ** rng.uniform(-9, 0)
            ys = reference_model(TIME_COEFFS[5], GRID_50) / np.max(
                np.abs(reference_model(TIME_COEFFS[5], GRID_50))
            ) * scale + rng.normal(0, 0.05 * scale, GRID_50.size)
            corpus.append((GRID_50, ys, degree))
        for xs, ys, degree in corpus:
            fit = fit_inverse_power(xs, ys, degree)
            fitted = build_design_matrix(xs, degree) @ fit.coefficients
            total = float(np.sum((ys - ys.mean()) ** 2))
            split = float(np.sum((ys - fitted) ** 2) + np.sum((fitted - ys.mean()) ** 2))
            assert split == pytest.approx(total, rel=1e-8)


def test_criterion_4_confidence_domain_coverage():
    """95% confidence domain covers the truth in 95% +- 3% of 500 refits."""
    with criterion(4, "confidence-domain coverage sits in [0.92, 0.98]"):
        start = time.perf_counter()
        xs = np.linspace(3.0, 7.0, 200)
        truth = TIME_COEFFS[5]
        ys0 = reference_model(truth, xs)
        rng = np.random.default_rng(2024)
        hits = 0
        runs = 500
        for _ in range(runs):
            ys = ys0 + rng.normal(0.0, 2e-11, xs.size)
            domain = confidence_domain(fit_inverse_power(xs, ys, 5), alpha=0.05)
            hits += domain.contains(truth)
        coverage = hits / runs
        assert 0.92 <= coverage <= 0.98, f"coverage {coverage:.3f}"
        assert time.perf_counter() - start < 30.0


def test_criterion_5_segmentation_recovery():
    """Six-level traces at SNR 10: boundaries within 3 samples in >=95% of
    runs, recovered levels within two standard errors in >=95% of segments."""
    with criterion(5, "six-level change points and levels recovered"):
        start = time.perf_counter()
        levels = [0.45, 0.62, 0.50, 0.58, 0.44, 0.35]
        durations = [3.0, 4.0, 3.5, 3.0, 2.5, 4.0]
        min_gap = min(abs(b - a) for a, b in zip(levels, levels[1:]))
        sigma = min_gap / 10.0  # signal-to-noise ratio exactly 10
        config = SegmentationConfig(1.0, min_gap / 2.0, 5)
        rng = np.random.default_rng(424242)
        runs = 100
        boundary_ok = 0
        level_checks = level_hits = 0
        rate = 100.0
        true_bounds = np.cumsum(durations)[:-1]
        for _ in range(runs):
            schedule = six_level_schedule(
                levels, durations, sample_rate=rate, noise_sigma=sigma,
                seed=int(rng.integers(2**63)),
            )
            trace = generate_trace(schedule).trace
            segments = detect_steps(trace, config)
            if len(segments) == 6:
                bounds = np.array([seg.end for seg in segments[:-1]])
                if np.all(np.abs(bounds - true_bounds) <= 3.0 * trace.dt + 1e-12):
                    boundary_ok += 1
                for seg, planted in zip(segments, levels):
                    m = round(seg.duration / trace.dt)
                    level_checks += 1
                    level_hits += abs(seg.level - planted) <= 2.0 * sigma / np.sqrt(m)
        assert boundary_ok >= 95, f"boundaries recovered in {boundary_ok}/100 runs"
        level_rate = level_hits / level_checks
        assert level_rate >= 0.95, f"levels within 2 SE in {level_rate:.3f} of segments"
        assert time.perf_counter() - start < 10.0


def test_criterion_6_energy_exactness():
    """Rectangle integrates exactly; triangle to 1e-12."""
    with criterion(6, "trapezoidal energy is exact on rectangle and ramp"):
        flat = PowerTrace(t0=0.0, dt=0.01, watts=np.full(1001, 250.0))
        assert integrate_energy(flat) == 2500.0
        times = np.linspace(0.0, 2.0, 201)
        ramp = PowerTrace(t0=0.0, dt=0.01, watts=5.0 * times)
        assert abs(integrate_energy(ramp) - 10.0) <= 1e-12


CLOSURE_TRUTHS = {
    "time": {
        OperationKind.COPY: (8e-5, 1e-6),
        OperationKind.SUM: (6e-5, 8e-7),
        OperationKind.PRODUCT: (7e-5, 9e-7),
    },
    "power": {
        OperationKind.COPY: (6e-4, 1e-5),
        OperationKind.SUM: (4e-4, 8e-6),
        OperationKind.PRODUCT: (9e-4, 2e-5),
    },
}


def _closure_models():
    """Fit per-kind unitary models from known positive decreasing curves."""
    xs = np.linspace(3.0, 13.0, 40)
    time_fits = {}
    power_fits = {}
    for kind in OperationKind:
        slope, floor = CLOSURE_TRUTHS["time"][kind]
        time_fits[kind] = fit_inverse_power(xs, slope / xs + floor, 1)
        slope, floor = CLOSURE_TRUTHS["power"][kind]
        power_fits[kind] = fit_inverse_power(xs, slope / xs + floor, 1)
    return UnitaryModelSet(time_fits, power_fits)


def test_criterion_7_pipeline_closure():
    """generate -> segment -> integrate reproduces predict_energy to 1%."""
    with criterion(7, "pipeline closure within 1% at n=100000"):
        start = time.perf_counter()
        models = _closure_models()
        workload = WorkloadSpec(
            n=10**5,
            cpu_time=0.25,
            counts={
                OperationKind.COPY: 2,
                OperationKind.SUM: 3,
                OperationKind.PRODUCT: 1,
            },
            phases={
                "idle": PhaseBudget(30.0, 2.0),
                "active": PhaseBudget(45.0, 1.5),
                "pause": PhaseBudget(45.0, 1.0),
                "end": PhaseBudget(35.0, 1.2),
            },
        )
        predicted = predict(workload, models)

        schedule = schedule_from_workload(workload, models, sample_rate=200.0)
        result = generate_trace(schedule)

        segments = detect_steps(result.trace, SegmentationConfig(0.3, 1.0, 5))
        expected_sequence = (
            PhaseLabel.IDLE,
            PhaseLabel.ALLOC,
            PhaseLabel.COPY_H2D,
            PhaseLabel.SUM,
            PhaseLabel.STANDBY,
            PhaseLabel.PRODUCT,
            PhaseLabel.ENERGY_SAVING,
        )
        labeled = label_phases(segments, expected_sequence)
        assert [seg.label for seg in labeled] == list(expected_sequence)

        op_labels = {PhaseLabel.COPY_H2D, PhaseLabel.SUM, PhaseLabel.PRODUCT}
        measured_time = workload.cpu_time + sum(
            seg.duration for seg in labeled if seg.label in op_labels
        )
        measured_energy = integrate_energy(result.trace)
        report = compare_prediction(predicted, measured_time, measured_energy)
        assert report.energy_relative_error <= 0.01, (
            f"relative energy error {report.energy_relative_error:.4f} "
            f"(predicted {predicted.total_energy:.2f} J, measured {measured_energy:.2f} J)"
        )
        assert report.time_relative_error <= 0.01
        assert time.perf_counter() - start < 5.0


def test_criterion_8_unitary_evaluation():
    """Model evaluation equals independent term-by-term summation."""
    with criterion(8, "fitted-curve evaluation matches brute-force arithmetic"):
        coeffs = TIME_COEFFS[5]
        fit = FitResult(5, coeffs, 1.0, 0.0, 50)
        x = 5.0
        brute = coeffs[-1]
        for k in range(1, 6):
            brute += coeffs[k - 1] / x**k
        got = evaluate_fit(fit, x)
        assert abs(got - brute) <= 1e-15 * abs(brute)


def _cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "joulecast", *args], capture_output=True, text=True
    )


def test_criterion_9_cli_determinism_and_exit_codes(tmp_path):
    """Byte-identical seeded simulation; exit codes 0/2/3/4/5 as documented."""
    with criterion(9, "CLI determinism and exit-code contract"):
        schedule = {
            "phases": [
                {"label": "alloc", "duration": 2.0, "level": 0.45},
                {"label": "copy_h2d", "duration": 2.0, "level": 0.62},
                {"label": "sum", "duration": 2.0, "level": 0.50},
                {"label": "product", "duration": 2.0, "level": 0.58},
                {"label": "copy_d2h", "duration": 2.0, "level": 0.44},
                {"label": "standby", "duration": 2.0, "level": 0.35},
            ],
            "sample_rate": 100.0,
            "noise_sigma": 0.004,
            "seed": 5,
        }
        schedule_path = tmp_path / "schedule.json"
        schedule_path.write_text(json.dumps(schedule))

        # determinism: two seeded runs are byte-identical
        traces = []
        for name in ("one.csv", "two.csv"):
            out = tmp_path / name
            proc = _cli(
                "simulate", "--schedule", str(schedule_path), "--seed", "77",
                "--out", str(out), "--truth", str(tmp_path / (name + ".json")),
            )
            assert proc.returncode == 0
            traces.append(out.read_bytes())
        assert traces[0] == traces[1]

        # success path: analyze, fit, predict, report all exit 0
        config = tmp_path / "seg.cfg"
        config.write_text(
            "min_segment_duration = 1.0\nlevel_change_threshold = 0.04\n"
        )
        segments_csv = tmp_path / "segments.csv"
        assert _cli(
            "analyze", "--trace", str(tmp_path / "one.csv"), "--config", str(config),
            "--labels", "alloc,copy_h2d,sum,product,copy_d2h,standby",
            "--out", str(segments_csv),
        ).returncode == 0

        xs = np.linspace(3.0, 12.0, 30)
        points = tmp_path / "points.csv"
        points.write_text(
            "\n".join(f"{float(x)!r},{float(2e-8 / x + 1e-9)!r}" for x in xs) + "\n"
        )
        fit_json = tmp_path / "fit.json"
        assert _cli(
            "fit", "--points", str(points), "--degree", "1", "--out", str(fit_json)
        ).returncode == 0

        models = tmp_path / "models"
        models.mkdir()
        for metric in ("time", "power"):
            (models / f"{metric}_sum.json").write_text(fit_json.read_text())
        workload = tmp_path / "workload.cfg"
        workload.write_text(
            "n = 100000\ncpu_time = 0.1\ncounts.sum = 1\n"
            "phases.idle.power = 30\nphases.idle.time = 1\n"
        )
        assert _cli(
            "predict", "--workload", str(workload), "--models", str(models),
            "--out", str(tmp_path / "prediction.json"),
        ).returncode == 0

        assert _cli(
            "report", "--fit", str(fit_json), "--range", "3:7:0.1",
            "--out", str(tmp_path / "curve.csv"),
        ).returncode == 0

        # exit 2: missing input file
        assert _cli(
            "simulate", "--schedule", str(tmp_path / "missing.json"),
            "--out", str(tmp_path / "x.csv"), "--truth", str(tmp_path / "x.json"),
        ).returncode == 2

        # exit 3: label count mismatch
        assert _cli(
            "analyze", "--trace", str(tmp_path / "one.csv"), "--config", str(config),
            "--labels", "alloc,sum", "--out", str(tmp_path / "bad.csv"),
        ).returncode == 3

        # exit 4: numerically collinear points
        collinear = tmp_path / "collinear.csv"
        collinear.write_text(
            "\n".join(f"{5.0 + i * 1e-13!r},1.0" for i in range(8)) + "\n"
        )
        assert _cli(
            "fit", "--points", str(collinear), "--degree", "3",
            "--out", str(tmp_path / "bad_fit.json"),
        ).returncode == 4

        # exit 5: workload needs a model that is not on disk
        missing_kind = tmp_path / "needs_product.cfg"
        missing_kind.write_text("n = 1000\ncounts.product = 2\n")
        assert _cli(
            "predict", "--workload", str(missing_kind), "--models", str(models),
            "--out", str(tmp_path / "bad_pred.json"),
        ).returncode == 5
