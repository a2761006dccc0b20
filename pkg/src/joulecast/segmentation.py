"""Step-function approximation of power traces and per-phase metrics.

A GPU run shows up on the power trace as a staircase: one near-constant
level per execution phase. The detector here smooths the trace, places
change points greedily where the smoothed derivative spikes, refines each
boundary with a local two-mean least-squares split, and merges neighbours
whose levels are closer than the configured threshold. The result is a
contiguous partition of the trace into labeled, constant-power segments
from whose durations and levels the per-element metrics follow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import InsufficientDataError, LabelingError
from .trace import PowerTrace


class PhaseLabel(str, Enum):
    """Execution phases distinguishable on a trace."""

    ALLOC = "alloc"
    COPY_H2D = "copy_h2d"
    SUM = "sum"
    PRODUCT = "product"
    COPY_D2H = "copy_d2h"
    STANDBY = "standby"
    IDLE = "idle"
    ENERGY_SAVING = "energy_saving"

    def __str__(self) -> str:  # keep CSV/CLI output free of the enum prefix
        return self.value


#: Temporal order of the six levels visible on a full run: allocation,
#: host-to-device copies, sums, products, device-to-host copies plus
#: deallocation, then stand-by.
SIX_LEVEL_SEQUENCE = (
    PhaseLabel.ALLOC,
    PhaseLabel.COPY_H2D,
    PhaseLabel.SUM,
    PhaseLabel.PRODUCT,
    PhaseLabel.COPY_D2H,
    PhaseLabel.STANDBY,
)


@dataclass(frozen=True)
class StepSegment:
    """One constant-power interval of the step approximation."""

    start: float
    end: float
    level: float
    label: PhaseLabel | None = None

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"segment start {self.start!r} must precede end {self.end!r}")
        if not np.isfinite(self.level):
            raise ValueError("segment level must be finite")

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class SegmentationConfig:
    """Tuning knobs of the step detector.

    min_segment_duration  shortest admissible segment, in seconds
    level_change_threshold  smallest level jump treated as a real phase
                            change, in watts
    smoothing_window  odd number of samples for the moving average

    Segments shorter than the smoothing window are below the detector's
    resolution, so the effective minimum spacing between change points
    is the larger of min_segment_duration and the window span.
    """

    min_segment_duration: float
    level_change_threshold: float
    smoothing_window: int = 5

    def __post_init__(self):
        if not self.min_segment_duration > 0:
            raise ValueError("min_segment_duration must be positive")
        if not self.level_change_threshold > 0:
            raise ValueError("level_change_threshold must be positive")
        if self.smoothing_window < 1 or self.smoothing_window % 2 == 0:
            raise ValueError("smoothing_window must be an odd count >= 1")


@dataclass(frozen=True)
class UnitaryMetrics:
    """Per-element cost of one operation at one vector size."""

    operation: PhaseLabel
    vector_size: int
    unitary_time: float
    unitary_power: float

    def __post_init__(self):
        if self.vector_size < 1:
            raise ValueError("vector_size must be at least 1")
        if self.unitary_time < 0:
            raise ValueError("unitary_time must be non-negative")


def _moving_average(x: np.ndarray, window: int) -> np.ndarray:
    if window <= 1:
        return x.astype(float)
    half = window // 2
    padded = np.pad(x, half, mode="edge")
    csum = np.cumsum(np.insert(padded, 0, 0.0))
    return (csum[window:] - csum[:-window]) / window


def _refine_boundary(
    watts: np.ndarray,
    lowest: int,
    highest: int,
    guess: int,
    context: int,
    lo_edge: int,
    hi_edge: int,
) -> int:
    """Least-squares two-mean split, restricted to [lowest, highest].

    The split is scored on a sample window padded by `context` on both
    sides so the competing means have data to rest on; the window never
    crosses the adjacent boundaries, where a two-level model would stop
    describing the data.
    """
    if highest <= lowest:
        return guess
    w0 = max(lo_edge, lowest - context)
    w1 = min(hi_edge, highest + context)
    seg = watts[w0:w1]
    csum = np.cumsum(seg)
    total = csum[-1]
    m = seg.size
    ks = np.arange(1, m)
    left = csum[:-1]
    # minimizing the two-mean SSE is maximizing sum_l^2/k + sum_r^2/(m-k)
    score = left**2 / ks + (total - left) ** 2 / (m - ks)
    k_lo = lowest - w0
    k_hi = highest - w0
    window = score[k_lo - 1 : k_hi]
    return lowest + int(np.argmax(window))


def detect_steps(trace: PowerTrace, config: SegmentationConfig) -> list[StepSegment]:
    """Approximate a trace by constant-power segments.

    The returned segments partition [t0, end_time] contiguously, each
    lasts at least min_segment_duration, and adjacent levels differ by at
    least level_change_threshold. Levels are means of the raw samples.
    """
    watts = trace.watts
    n = watts.size
    if n < 2 * config.smoothing_window:
        raise InsufficientDataError(
            f"trace has {n} samples but smoothing window {config.smoothing_window} "
            f"needs at least {2 * config.smoothing_window}"
        )

    smoothed = _moving_average(watts, config.smoothing_window)
    jumps = np.diff(smoothed)
    # derivative screen: |d(smoothed)/dt| > threshold / min_duration, but
    # never stricter than half the plateau height a threshold-sized jump
    # leaves after being spread across the smoothing window, so legal
    # phase changes stay detectable when the window outlasts min duration
    per_sample_jump = min(
        config.level_change_threshold * trace.dt / config.min_segment_duration,
        0.5 * config.level_change_threshold / config.smoothing_window,
    )
    candidates = np.flatnonzero(np.abs(jumps) > per_sample_jump)
    # ceil so min_gap samples always span at least min_segment_duration;
    # segments shorter than the smoothing window are below the detector's
    # resolution (their smoothed signatures overlap), so the window also
    # bounds the spacing
    min_gap = max(
        math.ceil(config.min_segment_duration / trace.dt - 1e-12),
        config.smoothing_window,
        1,
    )

    # one representative per equal-magnitude plateau of candidate jumps,
    # placed at the plateau middle so noiseless steps land exactly. Two
    # jumps closer than the smoothing window leave abutting plateaus in
    # a single candidate run, so every plateau gets its own entry; the
    # equality test tolerates the ulp wobble of the windowed cumsum.
    if candidates.size:
        mags = np.abs(jumps[candidates])
        new_group = np.empty(candidates.size, dtype=bool)
        new_group[0] = True
        new_group[1:] = (np.diff(candidates) > 1) | (
            np.abs(np.diff(mags)) > 1e-9 * mags[:-1]
        )
        starts = np.flatnonzero(new_group)
        ends = np.append(starts[1:], candidates.size)
        rep_indices = candidates[(starts + ends - 1) // 2]
        rep_mags = mags[starts]
    else:
        rep_indices = np.empty(0, dtype=int)
        rep_mags = np.empty(0)

    # greedy placement: larger jumps win when two candidates are closer
    # than the minimum segment duration; an occupancy mask makes the
    # spacing test constant-time
    order = np.lexsort((rep_indices, -rep_mags))
    blocked = np.zeros(n + 1, dtype=bool)
    accepted: list[int] = []
    for idx in rep_indices[order]:
        boundary = int(idx) + 1
        if boundary < min_gap or boundary > n - 1 - min_gap:
            continue
        if not blocked[boundary]:
            accepted.append(boundary)
            blocked[max(boundary - min_gap + 1, 0) : boundary + min_gap] = True
    accepted.sort()

    prefix = np.concatenate(([0.0], np.cumsum(watts)))

    # sweep noise-spawned boundaries first (discounted threshold, since
    # the coarse placement biases the means a little), then refine the
    # survivors with uncluttered corridors, then enforce the full
    # level-difference contract
    edges = _merge_edges(prefix, [0, *accepted, n], 0.75 * config.level_change_threshold)

    boundaries = edges[1:-1]
    context = max(config.smoothing_window, 3)
    refined = []
    for j, b in enumerate(boundaries):
        # movement caps keep neighbours at least min_gap apart even when
        # both shift toward each other
        if j > 0:
            room_down = (b - boundaries[j - 1] - min_gap) // 2
        else:
            room_down = b - min_gap
        if j + 1 < len(boundaries):
            room_up = (boundaries[j + 1] - b - min_gap) // 2
        else:
            room_up = (n - 1 - min_gap) - b
        lowest = b - min(context, max(room_down, 0))
        highest = b + min(context, max(room_up, 0))
        lo_edge = boundaries[j - 1] if j > 0 else 0
        hi_edge = boundaries[j + 1] if j + 1 < len(boundaries) else n
        refined.append(
            _refine_boundary(watts, lowest, highest, b, context, lo_edge, hi_edge)
        )

    edges = _merge_edges(prefix, [0, *sorted(refined), n], config.level_change_threshold)

    segments = []
    for i in range(len(edges) - 1):
        lo, hi = edges[i], edges[i + 1]
        start = trace.t0 + lo * trace.dt
        end = trace.end_time if hi == n else trace.t0 + hi * trace.dt
        segments.append(StepSegment(start, end, float(np.mean(watts[lo:hi]))))
    return segments


def _merge_edges(prefix: np.ndarray, edges: list[int], threshold: float) -> list[int]:
    """Drop boundaries between segments whose means differ below threshold.

    Merges the closest pair first; `prefix` is the cumulative sample sum,
    so each pass costs one vector operation per merge.
    """
    edges = list(edges)
    while len(edges) > 2:
        bounds = np.asarray(edges)
        sums = prefix[bounds[1:]] - prefix[bounds[:-1]]
        means = sums / np.diff(bounds)
        diffs = np.abs(np.diff(means))
        k = int(np.argmin(diffs))
        if diffs[k] >= threshold:
            break
        del edges[k + 1]
    return edges


def label_phases(
    segments: list[StepSegment], expected: tuple[PhaseLabel, ...] | list[PhaseLabel]
) -> list[StepSegment]:
    """Assign the expected phase labels to segments in temporal order."""
    if len(segments) != len(expected):
        raise LabelingError(n_segments=len(segments), n_labels=len(expected))
    return [replace(seg, label=label) for seg, label in zip(segments, expected)]


def unitary_metrics(
    segment: StepSegment, op_count: int, vector_size: int, baseline: float
) -> UnitaryMetrics:
    """Per-element time and marginal power of the operations in a segment.

    The segment is assumed to contain op_count back-to-back executions of
    one operation over vectors of vector_size elements. The baseline (the
    stand-by or idle level) is subtracted so that unitary power measures
    only the increment caused by the computation.
    """
    if op_count < 1:
        raise ValueError("op_count must be at least 1")
    if vector_size < 1:
        raise ValueError("vector_size must be at least 1")
    if segment.label is None:
        raise ValueError("segment must be labeled before computing unitary metrics")
    return UnitaryMetrics(
        operation=segment.label,
        vector_size=vector_size,
        unitary_time=(segment.duration / op_count) / vector_size,
        unitary_power=(segment.level - baseline) / vector_size,
    )


def step_function_trace(segments: list[StepSegment], like: PowerTrace) -> PowerTrace:
    """Sample the step approximation on the same grid as `like`.

    Useful for overlay plots and for checking detector idempotence.
    """
    starts = np.array([seg.start for seg in segments])
    levels = np.array([seg.level for seg in segments])
    idx = np.clip(np.searchsorted(starts, like.times, side="right") - 1, 0, len(segments) - 1)
    return PowerTrace(t0=like.t0, dt=like.dt, watts=levels[idx])


def segments_to_csv(segments: list[StepSegment]) -> str:
    """Serialize segments as `start,end,level,label` rows."""
    lines = ["start,end,level,label"]
    for seg in segments:
        label = "" if seg.label is None else str(seg.label)
        lines.append(f"{float(seg.start)!r},{float(seg.end)!r},{float(seg.level)!r},{label}")
    return "\n".join(lines) + "\n"


def parse_labels(text: str) -> tuple[PhaseLabel, ...]:
    """Parse a comma-separated label list such as 'alloc,sum,standby'."""
    labels = []
    for token in text.split(","):
        token = token.strip()
        try:
            labels.append(PhaseLabel(token))
        except ValueError:
            valid = ", ".join(l.value for l in PhaseLabel)
            raise ValueError(f"unknown phase label {token!r}; valid labels: {valid}") from None
    return tuple(labels)
