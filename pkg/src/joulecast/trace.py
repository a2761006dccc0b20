"""Power-trace ingestion, clamp calibration and energy integration.

A measurement run arrives as an oscilloscope CSV export of (time, volts)
pairs. The clamp voltage is converted to watts through an affine
calibration (rail voltage times the clamp current, plus a constant offset
for the unmeasured low-voltage rail), and energy is obtained by
trapezoidal integration of the resulting power trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import as_1d_float_array, require_finite
from .errors import (
    ConfigError,
    InsufficientDataError,
    NonUniformSamplingError,
    TimestampOrderError,
    TraceCSVError,
    TraceRangeError,
)

# Successive sampling gaps may deviate from the median gap by at most this
# fraction before the trace is rejected as non-uniform.
UNIFORMITY_TOLERANCE = 0.10


@dataclass(frozen=True)
class RawTrace:
    """Uncalibrated (time, volts) samples as exported by the scope."""

    times: np.ndarray
    volts: np.ndarray
    source_label: str = ""

    def __post_init__(self):
        times = as_1d_float_array(self.times, "times")
        volts = as_1d_float_array(self.volts, "volts")
        if times.size != volts.size:
            raise ValueError("times and volts must have equal length")
        if times.size < 2:
            raise InsufficientDataError("a trace needs at least 2 samples")
        require_finite(times, "times")
        require_finite(volts, "volts")
        if not np.all(np.diff(times) > 0):
            raise TimestampOrderError("timestamps must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "volts", volts)

    def __len__(self) -> int:
        return self.times.size


@dataclass(frozen=True)
class ClampCalibration:
    """Affine transfer from clamp volts to watts.

    watts = rail_voltage * (volts / volts_per_amp) + fixed_offset_watts

    The offset models a supply rail whose draw is treated as constant
    instead of being measured by a second clamp.
    """

    volts_per_amp: float
    rail_voltage: float
    fixed_offset_watts: float = 0.0

    def __post_init__(self):
        if not self.volts_per_amp > 0:
            raise ValueError("volts_per_amp must be positive")
        if not self.rail_voltage > 0:
            raise ValueError("rail_voltage must be positive")
        if self.fixed_offset_watts < 0:
            raise ValueError("fixed_offset_watts must be non-negative")

    def watts(self, volts: np.ndarray) -> np.ndarray:
        amps = np.asarray(volts, dtype=float) / self.volts_per_amp
        return self.rail_voltage * amps + self.fixed_offset_watts


#: Pass-through calibration for CSV files that already contain watts.
IDENTITY_CALIBRATION = ClampCalibration(volts_per_amp=1.0, rail_voltage=1.0)


@dataclass(frozen=True)
class PowerTrace:
    """Uniformly sampled instantaneous power in watts."""

    t0: float
    dt: float
    watts: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        watts = as_1d_float_array(self.watts, "watts")
        if watts.size < 2:
            raise InsufficientDataError("a trace needs at least 2 samples")
        require_finite(watts, "watts")
        object.__setattr__(self, "watts", watts)

    def __len__(self) -> int:
        return self.watts.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.watts.size)

    @property
    def end_time(self) -> float:
        return self.t0 + self.dt * (self.watts.size - 1)


def parse_trace_csv(data: bytes | str, source_label: str = "") -> RawTrace:
    """Parse a two-column CSV export into a RawTrace.

    Accepts an optional single header line, LF or CRLF endings, and
    scientific notation. Raises TraceCSVError with the offending line
    number on malformed input.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise TraceCSVError(f"input is not UTF-8 text: {exc}") from None

    times: list[float] = []
    volts: list[float] = []
    header_allowed = True
    for lineno, line in enumerate(data.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise TraceCSVError(
                f"expected 2 comma-separated fields, got {len(parts)}", lineno
            )
        try:
            t, v = float(parts[0]), float(parts[1])
        except ValueError:
            if header_allowed:
                header_allowed = False
                continue
            raise TraceCSVError(f"malformed numeric field in {line!r}", lineno) from None
        header_allowed = False
        if times and t <= times[-1]:
            raise TimestampOrderError(
                f"line {lineno}: timestamp {t!r} does not increase past {times[-1]!r}"
            )
        times.append(t)
        volts.append(v)

    if len(times) < 2:
        raise InsufficientDataError(
            f"need at least 2 data rows, found {len(times)}"
        )
    return RawTrace(np.array(times), np.array(volts), source_label=source_label)


def serialize_trace_csv(raw: RawTrace) -> str:
    """Inverse of parse_trace_csv; emits shortest round-tripping decimals."""
    lines = [f"{float(t)!r},{float(v)!r}" for t, v in zip(raw.times, raw.volts)]
    return "\n".join(lines) + "\n"


def power_trace_to_csv(trace: PowerTrace, header: str = "time,watts") -> str:
    """Serialize a PowerTrace to (time, watts) CSV for plotting."""
    lines = [header] if header else []
    lines += [f"{float(t)!r},{float(w)!r}" for t, w in zip(trace.times, trace.watts)]
    return "\n".join(lines) + "\n"


def calibrate(raw: RawTrace, cal: ClampCalibration) -> PowerTrace:
    """Convert clamp volts to watts on a fixed-step time axis.

    The raw timestamps must already be approximately uniform: any gap
    deviating from the median gap by 10% or more raises
    NonUniformSamplingError rather than silently resampling, because
    resampling would distort downstream segment durations.
    """
    gaps = np.diff(raw.times)
    median_gap = float(np.median(gaps))
    if np.max(np.abs(gaps - median_gap)) >= UNIFORMITY_TOLERANCE * median_gap:
        raise NonUniformSamplingError(
            "sampling gaps deviate more than "
            f"{UNIFORMITY_TOLERANCE:.0%} from the median gap {median_gap!r}; "
            "resample the input explicitly before calibrating"
        )
    return PowerTrace(t0=float(raw.times[0]), dt=median_gap, watts=cal.watts(raw.volts))


def integrate_energy(
    trace: PowerTrace, start: float | None = None, stop: float | None = None
) -> float:
    """Trapezoidal integral of power over [start, stop], in joules.

    Defaults to the full trace span. Endpoints may fall between samples;
    the signal is treated as piecewise linear, so the rule is exact for
    the step-plus-ramp traces this pipeline produces.
    """
    t_lo, t_hi = trace.t0, trace.end_time
    if start is None:
        start = t_lo
    if stop is None:
        stop = t_hi
    if not (t_lo <= start < stop <= t_hi):
        raise TraceRangeError(
            f"interval [{start!r}, {stop!r}] outside trace span [{t_lo!r}, {t_hi!r}]"
        )

    times = trace.times
    i_lo = int(np.searchsorted(times, start, side="right"))
    i_hi = int(np.searchsorted(times, stop, side="left"))
    v_start = float(np.interp(start, times, trace.watts))
    v_stop = float(np.interp(stop, times, trace.watts))

    ts = np.concatenate(([start], times[i_lo:i_hi], [stop]))
    vs = np.concatenate(([v_start], trace.watts[i_lo:i_hi], [v_stop]))
    return float(np.sum(0.5 * (vs[1:] + vs[:-1]) * np.diff(ts)))


def load_calibration(text: str) -> ClampCalibration:
    """Read a calibration from key=value text.

    Required keys: volts_per_amp, rail_voltage, fixed_offset_watts.
    """
    from ._kvconfig import parse_kv

    entries = parse_kv(text)
    required = {"volts_per_amp", "rail_voltage", "fixed_offset_watts"}
    missing = required - entries.keys()
    if missing:
        raise ConfigError(f"calibration is missing keys: {sorted(missing)}")
    extra = entries.keys() - required
    if extra:
        raise ConfigError(f"calibration has unknown keys: {sorted(extra)}")
    try:
        values = {k: float(v) for k, v in entries.items()}
    except ValueError as exc:
        raise ConfigError(f"calibration value not numeric: {exc}") from None
    try:
        return ClampCalibration(**values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
