"""Synthetic trace generation with retained ground truth.

Real measurements need clamps and an oscilloscope; the generator stands
in for them by sampling an explicit phase schedule, optionally with
additive Gaussian noise, while keeping the schedule itself as ground
truth. Every analysis stage can therefore be checked against the planted
segments and the analytic energy sum(level * duration).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ResolutionError
from .predictor import (
    OperationKind,
    UnitaryModelSet,
    WorkloadSpec,
    _clamped_unitary,
    _log_size,
)
from .segmentation import SIX_LEVEL_SEQUENCE, PhaseLabel, StepSegment
from .trace import PowerTrace

#: Every schedule phase must cover at least this many samples.
MIN_SAMPLES_PER_PHASE = 10


@dataclass(frozen=True)
class SchedulePhase:
    label: PhaseLabel
    duration: float
    level: float

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("phase duration must be positive")
        if not math.isfinite(self.level):
            raise ValueError("phase level must be finite")


@dataclass(frozen=True)
class PhaseSchedule:
    """Ordered constant-power phases plus sampling and noise parameters."""

    phases: tuple[SchedulePhase, ...]
    sample_rate: float
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.phases:
            raise ValueError("schedule needs at least one phase")
        object.__setattr__(self, "phases", tuple(self.phases))
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")

    @property
    def total_duration(self) -> float:
        return sum(phase.duration for phase in self.phases)

    @property
    def analytic_energy(self) -> float:
        """Exact energy of the noiseless schedule, in joules."""
        return sum(phase.level * phase.duration for phase in self.phases)

    def ground_truth_segments(self) -> list[StepSegment]:
        segments = []
        t = 0.0
        for phase in self.phases:
            segments.append(StepSegment(t, t + phase.duration, phase.level, phase.label))
            t += phase.duration
        return segments

    def to_dict(self) -> dict:
        return {
            "phases": [
                {"label": str(p.label), "duration": p.duration, "level": p.level}
                for p in self.phases
            ],
            "sample_rate": self.sample_rate,
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PhaseSchedule":
        try:
            phases = tuple(
                SchedulePhase(
                    label=PhaseLabel(p["label"]),
                    duration=float(p["duration"]),
                    level=float(p["level"]),
                )
                for p in doc["phases"]
            )
            return cls(
                phases=phases,
                sample_rate=float(doc["sample_rate"]),
                noise_sigma=float(doc.get("noise_sigma", 0.0)),
                seed=int(doc.get("seed", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid schedule document: {exc!r}") from None

    @classmethod
    def from_json(cls, text: str) -> "PhaseSchedule":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"schedule is not valid JSON: {exc}") from None
        return cls.from_dict(doc)


@dataclass(frozen=True)
class SyntheticTrace:
    """Generated trace together with its planted ground truth."""

    trace: PowerTrace
    segments: list[StepSegment]
    analytic_energy: float


def generate_trace(schedule: PhaseSchedule, seed: int | None = None) -> SyntheticTrace:
    """Sample the schedule into a PowerTrace; deterministic per seed.

    Samples lie at i/sample_rate for i = 0..round(total*rate); each phase
    owns the half-open interval [start, end), the final instant belongs
    to the last phase. Raises ResolutionError when a phase would cover
    fewer than MIN_SAMPLES_PER_PHASE samples.
    """
    for i, phase in enumerate(schedule.phases):
        samples = phase.duration * schedule.sample_rate
        if samples < MIN_SAMPLES_PER_PHASE:
            raise ResolutionError(
                f"phase {i} ({phase.label}) covers only {samples:.1f} samples at "
                f"{schedule.sample_rate} Hz; need {MIN_SAMPLES_PER_PHASE}"
            )

    dt = 1.0 / schedule.sample_rate
    n = int(round(schedule.total_duration * schedule.sample_rate)) + 1
    times = np.arange(n) * dt
    boundaries = np.cumsum([p.duration for p in schedule.phases])
    levels = np.array([p.level for p in schedule.phases])
    idx = np.minimum(
        np.searchsorted(boundaries, times, side="right"), len(levels) - 1
    )
    watts = levels[idx]

    if schedule.noise_sigma > 0:
        rng = np.random.default_rng(schedule.seed if seed is None else seed)
        watts = watts + rng.normal(0.0, schedule.noise_sigma, n)

    return SyntheticTrace(
        trace=PowerTrace(t0=0.0, dt=dt, watts=watts),
        segments=schedule.ground_truth_segments(),
        analytic_energy=schedule.analytic_energy,
    )


#: Phase labels used when a workload is turned back into a schedule.
_PHASE_LABELS = {
    "idle": PhaseLabel.IDLE,
    "active": PhaseLabel.ALLOC,
    "pause": PhaseLabel.STANDBY,
    "end": PhaseLabel.ENERGY_SAVING,
}
_KIND_LABELS = {
    OperationKind.COPY: PhaseLabel.COPY_H2D,
    OperationKind.SUM: PhaseLabel.SUM,
    OperationKind.PRODUCT: PhaseLabel.PRODUCT,
}


def schedule_from_workload(
    workload: WorkloadSpec,
    models: UnitaryModelSet,
    baseline: float = 0.0,
    sample_rate: float = 100.0,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> PhaseSchedule:
    """Invert the prediction model into a generable schedule.

    Each operation kind with a nonzero count becomes one phase of
    duration count * unitary_time(log n) * n at level
    baseline + unitary_power(log n) * n; the workload's bookkeeping
    phases keep their configured powers and times. With baseline 0 the
    energy of the generated trace matches predict_energy exactly up to
    sampling effects, which closes the generate-analyze-predict loop.
    """
    x = _log_size(workload)
    warnings: list[str] = []
    phases: list[SchedulePhase] = []

    def add(name: str):
        budget = workload.phases[name]
        if budget.time > 0:
            phases.append(SchedulePhase(_PHASE_LABELS[name], budget.time, budget.power))

    def add_op(kind: OperationKind):
        count = workload.counts[kind]
        if count == 0:
            return
        unit_time = _clamped_unitary(models.time_fit(kind), x, f"time/{kind}", warnings)
        unit_power = _clamped_unitary(models.power_fit(kind), x, f"power/{kind}", warnings)
        duration = count * unit_time * workload.n
        if duration > 0:
            phases.append(
                SchedulePhase(_KIND_LABELS[kind], duration, baseline + unit_power * workload.n)
            )

    add("idle")
    add("active")
    add_op(OperationKind.COPY)
    add_op(OperationKind.SUM)
    add("pause")
    add_op(OperationKind.PRODUCT)
    add("end")

    if not phases:
        raise ValueError("workload produces an empty schedule")
    return PhaseSchedule(
        phases=tuple(phases),
        sample_rate=sample_rate,
        noise_sigma=noise_sigma,
        seed=seed,
    )


def six_level_schedule(
    levels,
    durations,
    sample_rate: float = 100.0,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> PhaseSchedule:
    """Schedule shaped like a full run: the six canonical levels in order."""
    if len(levels) != 6 or len(durations) != 6:
        raise ValueError("six_level_schedule needs exactly 6 levels and durations")
    phases = tuple(
        SchedulePhase(label, float(duration), float(level))
        for label, duration, level in zip(SIX_LEVEL_SEQUENCE, durations, levels)
    )
    return PhaseSchedule(phases, sample_rate, noise_sigma, seed)
