"""Total time and energy prediction from fitted per-element models.

A program is decomposed into counted elementary operations (copies, sums,
products) over vectors of n elements plus four bookkeeping phases (idle,
active, pause, end). Predicted wall time is the CPU time plus, for each
operation kind, count * unitary_time(log n) * n. Predicted energy is the
sum of the phase power*time products plus, for each kind,
count * unitary_power(log n) * unitary_time(log n) * n**2.

Fitted unitary values can dip below zero outside the region the fit was
trained on; negative values are clamped to zero with a warning because
negative time or power is unphysical, and evaluations outside the fitted
range warn rather than fail since extrapolation is the model's purpose.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

from ._kvconfig import as_float, as_int, parse_kv
from .errors import ConfigError, DomainError, IncompleteModelError
from .regression import FitResult, evaluate_fit


class OperationKind(str, Enum):
    COPY = "copy"
    SUM = "sum"
    PRODUCT = "product"

    def __str__(self) -> str:
        return self.value


PHASE_NAMES = ("idle", "active", "pause", "end")


@dataclass(frozen=True)
class PhaseBudget:
    """Power draw and duration of one bookkeeping phase."""

    power: float
    time: float

    def __post_init__(self):
        if self.power < 0:
            raise ValueError("phase power must be non-negative")
        if self.time < 0:
            raise ValueError("phase time must be non-negative")


@dataclass(frozen=True)
class WorkloadSpec:
    """Decomposition of a program into counted elementary operations."""

    n: int
    cpu_time: float
    counts: dict[OperationKind, int]
    phases: dict[str, PhaseBudget]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("vector size n must be at least 1")
        if self.cpu_time < 0:
            raise ValueError("cpu_time must be non-negative")
        counts = {kind: int(self.counts.get(kind, 0)) for kind in OperationKind}
        if any(c < 0 for c in counts.values()):
            raise ValueError("operation counts must be non-negative")
        phases = dict(self.phases)
        unknown = phases.keys() - set(PHASE_NAMES)
        if unknown:
            raise ValueError(f"unknown phases: {sorted(unknown)}")
        for name in PHASE_NAMES:
            phases.setdefault(name, PhaseBudget(0.0, 0.0))
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "phases", phases)


@dataclass(frozen=True)
class UnitaryModelSet:
    """Fitted unitary time and power models, keyed by operation kind.

    Partial sets are fine as long as every kind the workload actually
    uses is covered.
    """

    time_fits: dict[OperationKind, FitResult] = field(default_factory=dict)
    power_fits: dict[OperationKind, FitResult] = field(default_factory=dict)

    def time_fit(self, kind: OperationKind) -> FitResult:
        try:
            return self.time_fits[kind]
        except KeyError:
            raise IncompleteModelError(f"no unitary time fit for {kind}") from None

    def power_fit(self, kind: OperationKind) -> FitResult:
        try:
            return self.power_fits[kind]
        except KeyError:
            raise IncompleteModelError(f"no unitary power fit for {kind}") from None


@dataclass(frozen=True)
class PredictionTerm:
    """One additive contribution to the totals."""

    name: str
    kind: str  # "cpu", "phase" or "operation"
    time: float = 0.0
    energy: float = 0.0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "time_seconds": self.time,
            "energy_joules": self.energy,
        }


@dataclass(frozen=True)
class Prediction:
    """Predicted totals with their itemized breakdown."""

    total_time: float
    total_energy: float
    terms: tuple[PredictionTerm, ...]
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "total_time_seconds": self.total_time,
            "total_energy_joules": self.total_energy,
            "breakdown": [term.to_dict() for term in self.terms],
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _clamped_unitary(
    fit: FitResult, x: float, what: str, warnings: list[str]
) -> float:
    value = evaluate_fit(fit, x)
    if fit.x_range is not None and not (fit.x_range[0] <= x <= fit.x_range[1]):
        warnings.append(
            f"{what}: evaluating at x={x:.4g} outside the fitted range "
            f"[{fit.x_range[0]:.4g}, {fit.x_range[1]:.4g}]"
        )
    if value < 0:
        warnings.append(f"{what}: negative fitted value {value:.4g} clamped to 0")
        return 0.0
    return value


def _log_size(workload: WorkloadSpec) -> float:
    x = math.log(workload.n)
    if not x > 0:
        raise DomainError(
            f"log(n) must be positive; n={workload.n} is too small for the model"
        )
    return x


def predict_time(workload: WorkloadSpec, models: UnitaryModelSet) -> Prediction:
    """CPU time plus count * unitary_time(log n) * n for each kind used."""
    x = _log_size(workload)
    warnings: list[str] = []
    terms = [PredictionTerm("cpu", "cpu", time=workload.cpu_time)]
    for kind in OperationKind:
        count = workload.counts[kind]
        if count == 0:
            continue
        unit = _clamped_unitary(models.time_fit(kind), x, f"time/{kind}", warnings)
        terms.append(
            PredictionTerm(str(kind), "operation", time=count * unit * workload.n)
        )
    total = sum(term.time for term in terms)
    return Prediction(total, 0.0, tuple(terms), tuple(warnings))


def predict_energy(workload: WorkloadSpec, models: UnitaryModelSet) -> Prediction:
    """Phase power*time terms plus the quadratic operation terms."""
    x = _log_size(workload)
    warnings: list[str] = []
    terms = [
        PredictionTerm(name, "phase", energy=budget.power * budget.time)
        for name, budget in ((p, workload.phases[p]) for p in PHASE_NAMES)
    ]
    for kind in OperationKind:
        count = workload.counts[kind]
        if count == 0:
            continue
        unit_power = _clamped_unitary(models.power_fit(kind), x, f"power/{kind}", warnings)
        unit_time = _clamped_unitary(models.time_fit(kind), x, f"time/{kind}", warnings)
        energy = count * unit_power * unit_time * workload.n**2
        terms.append(PredictionTerm(str(kind), "operation", energy=energy))
    total = sum(term.energy for term in terms)
    return Prediction(0.0, total, tuple(terms), tuple(warnings))


def predict(workload: WorkloadSpec, models: UnitaryModelSet) -> Prediction:
    """Combined time and energy prediction with one merged breakdown."""
    time_part = predict_time(workload, models)
    energy_part = predict_energy(workload, models)
    merged: dict[tuple[str, str], PredictionTerm] = {}
    for term in time_part.terms + energy_part.terms:
        key = (term.kind, term.name)
        if key in merged:
            prev = merged[key]
            merged[key] = PredictionTerm(
                term.name, term.kind, prev.time + term.time, prev.energy + term.energy
            )
        else:
            merged[key] = term
    warnings = list(time_part.warnings)
    warnings += [w for w in energy_part.warnings if w not in warnings]
    return Prediction(
        time_part.total_time,
        energy_part.total_energy,
        tuple(merged.values()),
        tuple(warnings),
    )


@dataclass(frozen=True)
class ComparisonReport:
    """Absolute and relative errors of a prediction against a measurement."""

    time_error: float
    time_relative_error: float
    energy_error: float
    energy_relative_error: float

    def to_dict(self) -> dict:
        return {
            "time_error_seconds": self.time_error,
            "time_relative_error": self.time_relative_error,
            "energy_error_joules": self.energy_error,
            "energy_relative_error": self.energy_relative_error,
        }


def compare_prediction(
    prediction: Prediction, measured_time: float, measured_energy: float
) -> ComparisonReport:
    """Measure prediction quality against observed time and energy."""
    if not measured_time > 0:
        raise ValueError("measured_time must be positive")
    if not measured_energy > 0:
        raise ValueError("measured_energy must be positive")
    dt = abs(prediction.total_time - measured_time)
    de = abs(prediction.total_energy - measured_energy)
    return ComparisonReport(dt, dt / measured_time, de, de / measured_energy)


def load_workload(text: str) -> WorkloadSpec:
    """Read a workload from key=value text.

    Keys: n, cpu_time, counts.copy, counts.sum, counts.product, and
    phases.<idle|active|pause|end>.<power|time>.
    """
    entries = parse_kv(text)
    known = {"n", "cpu_time"}
    known |= {f"counts.{kind}" for kind in OperationKind}
    known |= {f"phases.{p}.{f}" for p in PHASE_NAMES for f in ("power", "time")}
    unknown = entries.keys() - known
    if unknown:
        raise ConfigError(f"unknown workload keys: {sorted(unknown)}")

    counts = {
        kind: (as_int(entries, f"counts.{kind}") if f"counts.{kind}" in entries else 0)
        for kind in OperationKind
    }
    try:
        phases = {}
        for name in PHASE_NAMES:
            power_key, time_key = f"phases.{name}.power", f"phases.{name}.time"
            power = as_float(entries, power_key) if power_key in entries else 0.0
            time = as_float(entries, time_key) if time_key in entries else 0.0
            phases[name] = PhaseBudget(power, time)
        return WorkloadSpec(
            n=as_int(entries, "n"),
            cpu_time=as_float(entries, "cpu_time") if "cpu_time" in entries else 0.0,
            counts=counts,
            phases=phases,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
