"""Focused-state annotation from binocular disparity.

Pipeline per video: disparity -> mean+std threshold -> fixation gating ->
short-unfocused-interval smoothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    EmptyRecording,
    EyeRecording,
    FocusLabel,
    FocusLabelSeries,
    GazeEvent,
    GazePoint,
    LengthMismatch,
)

DEFAULT_MIN_UNFOCUSED_MS = 1000


@dataclass(frozen=True)
class DisparitySeries:
    t: np.ndarray
    d: np.ndarray  # non-negative, normalized-screen units

    def __len__(self) -> int:
        return len(self.t)


@dataclass(frozen=True)
class ThresholdStats:
    mean: float
    std: float  # population std

    @property
    def threshold(self) -> float:
        return self.mean + self.std


def binocular_disparity(left: GazePoint, right: GazePoint) -> float:
    """Euclidean distance between the two gaze points."""
    return math.hypot(left.x - right.x, left.y - right.y)


def disparity_series(rec: EyeRecording) -> DisparitySeries:
    if len(rec) == 0:
        raise EmptyRecording("empty eye segment")
    d = np.empty(len(rec))
    for i, s in enumerate(rec.samples):
        if s.left is None or s.right is None:
            raise EmptyRecording("disparity requires interpolated samples")
        d[i] = binocular_disparity(s.left, s.right)
    return DisparitySeries(rec.timestamps(), d)


def threshold_stats(d: DisparitySeries) -> ThresholdStats:
    if len(d) == 0:
        raise EmptyRecording("empty disparity series")
    return ThresholdStats(float(np.mean(d.d)), float(np.std(d.d)))


def threshold_labels(d: DisparitySeries) -> FocusLabelSeries:
    """Focused iff disparity <= mean + std, statistics over this video only."""
    stats = threshold_stats(d)
    label = np.where(d.d <= stats.threshold, FocusLabel.FOCUSED, FocusLabel.UNFOCUSED)
    return FocusLabelSeries(d.t, label.astype(np.int8))


def fixation_correct(raw: FocusLabelSeries, events) -> FocusLabelSeries:
    """Keep Focused only on fixation samples; saccade/unclassified force Unfocused."""
    events = list(events)
    if len(events) != len(raw):
        raise LengthMismatch(
            f"labels ({len(raw)}) and events ({len(events)}) differ in length"
        )
    fixation = np.array([e == GazeEvent.FIXATION for e in events])
    label = np.where(
        (raw.label == FocusLabel.FOCUSED) & fixation,
        FocusLabel.FOCUSED,
        FocusLabel.UNFOCUSED,
    )
    return FocusLabelSeries(raw.t, label.astype(np.int8))


def _runs(label: np.ndarray) -> list[tuple[int, int]]:
    """Maximal constant-label runs as (start, stop) index pairs, stop exclusive."""
    if len(label) == 0:
        return []
    change = np.flatnonzero(np.diff(label)) + 1
    bounds = np.concatenate(([0], change, [len(label)]))
    return [(int(bounds[i]), int(bounds[i + 1])) for i in range(len(bounds) - 1)]


def _run_duration_ms(t: np.ndarray, start: int, stop: int) -> float:
    """Duration of samples [start, stop): sum of sample periods, the last
    period extended by the series' median spacing."""
    if len(t) < 2:
        return 0.0
    median_dt = float(np.median(np.diff(t)))
    end_t = t[stop] if stop < len(t) else t[-1] + median_dt
    return float(end_t - t[start])


def smooth_intervals(
    labels: FocusLabelSeries, min_unfocused_ms: float = DEFAULT_MIN_UNFOCUSED_MS
) -> FocusLabelSeries:
    """Relabel every Unfocused run shorter than min_unfocused_ms as Focused.

    Runs are computed once on the input; the pass never cascades on its own
    output, and Focused runs are never shrunk.
    """
    if min_unfocused_ms < 0:
        raise ValueError("min_unfocused_ms must be >= 0")
    out = labels.label.copy()
    for start, stop in _runs(labels.label):
        if labels.label[start] != FocusLabel.UNFOCUSED:
            continue
        if _run_duration_ms(labels.t, start, stop) < min_unfocused_ms:
            out[start:stop] = FocusLabel.FOCUSED
    return FocusLabelSeries(labels.t, out)


def annotate_video(
    segment: EyeRecording, min_unfocused_ms: float = DEFAULT_MIN_UNFOCUSED_MS
) -> FocusLabelSeries:
    """Full annotation chain for one interpolated video segment."""
    d = disparity_series(segment)
    raw = threshold_labels(d)
    corrected = fixation_correct(raw, (s.event_type for s in segment.samples))
    return smooth_intervals(corrected, min_unfocused_ms)


def annotation_debug_rows(
    segment: EyeRecording, min_unfocused_ms: float = DEFAULT_MIN_UNFOCUSED_MS
):
    """Audit rows: timestamp_ms, disparity, raw_label, corrected_label, final_label."""
    d = disparity_series(segment)
    raw = threshold_labels(d)
    corrected = fixation_correct(raw, (s.event_type for s in segment.samples))
    final = smooth_intervals(corrected, min_unfocused_ms)
    for i in range(len(d)):
        yield (
            int(d.t[i]),
            float(d.d[i]),
            int(raw.label[i]),
            int(corrected.label[i]),
            int(final.label[i]),
        )
