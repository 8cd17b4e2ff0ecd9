"""CSV parsing, missing-value statistics, gap interpolation, video segmentation."""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass

import numpy as np

from .model import (
    N_CHANNELS,
    AllMissingField,
    ChannelCountMismatch,
    EmptyRecording,
    EyeRecording,
    EyeSample,
    EegRecording,
    GazeEvent,
    GazePoint,
    MissingColumn,
    NonMonotonicTimestamp,
    UnmatchedVideoEvent,
    VideoSegment,
)

EYE_COLUMNS = [
    "timestamp_ms",
    "left_x",
    "left_y",
    "right_x",
    "right_y",
    "gaze_event_type",
    "behavior_event",
]

EEG_COLUMNS = ["timestamp_ms"] + [f"ch_{i:02d}" for i in range(N_CHANNELS)] + [
    "behavior_event"
]

DEFAULT_EXCLUDE_THRESHOLD = 0.20

_VIDEO_EVENT_RE = re.compile(r"^video_(start|end):(\d+)$")


@dataclass(frozen=True)
class MissingReport:
    subject_id: str
    missing_fraction: float
    excluded: bool


def _parse_cell(cell: str) -> float | None:
    """Missing is an empty cell, the sentinel -1, or NaN."""
    cell = cell.strip()
    if not cell:
        return None
    try:
        v = float(cell)
    except ValueError:
        return None  # malformed numerics become missing, not parse failures
    if math.isnan(v) or v == -1:
        return None
    return v


def parse_eye_csv(path) -> EyeRecording:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = _read_header(reader, path)
        for col in EYE_COLUMNS:
            if col not in header:
                raise MissingColumn(f"{path}: missing column {col!r}")
        idx = {c: header.index(c) for c in EYE_COLUMNS}

        samples = []
        prev_t = None
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            t = int(round(float(row[idx["timestamp_ms"]])))
            if prev_t is not None and t <= prev_t:
                raise NonMonotonicTimestamp(
                    f"{path}: timestamp {t} at row {row_no} does not increase"
                )
            prev_t = t
            lx = _parse_cell(row[idx["left_x"]])
            ly = _parse_cell(row[idx["left_y"]])
            rx = _parse_cell(row[idx["right_x"]])
            ry = _parse_cell(row[idx["right_y"]])
            left = GazePoint(lx, ly) if lx is not None and ly is not None else None
            right = GazePoint(rx, ry) if rx is not None and ry is not None else None
            try:
                event = GazeEvent(row[idx["gaze_event_type"]].strip())
            except ValueError:
                event = GazeEvent.UNCLASSIFIED
            behavior = row[idx["behavior_event"]].strip() or None
            samples.append(EyeSample(t, left, right, event, behavior))
    return EyeRecording(tuple(samples))


def parse_eeg_csv(path) -> EegRecording:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = _read_header(reader, path)
        ch_cols = [c for c in header if c.startswith("ch_")]
        if len(ch_cols) != N_CHANNELS:
            raise ChannelCountMismatch(
                f"{path}: expected {N_CHANNELS} channel columns, got {len(ch_cols)}"
            )
        for col in EEG_COLUMNS:
            if col not in header:
                raise MissingColumn(f"{path}: missing column {col!r}")
        t_idx = header.index("timestamp_ms")
        ch_idx = [header.index(f"ch_{i:02d}") for i in range(N_CHANNELS)]
        ev_idx = header.index("behavior_event")

        ts, rows, events = [], [], []
        prev_t = None
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            t = int(round(float(row[t_idx])))
            if prev_t is not None and t <= prev_t:
                raise NonMonotonicTimestamp(
                    f"{path}: timestamp {t} at row {row_no} does not increase"
                )
            prev_t = t
            ts.append(t)
            vals = [_parse_cell(row[i]) for i in ch_idx]
            rows.append([math.nan if v is None else v for v in vals])
            events.append(row[ev_idx].strip() or None)
    return EegRecording(
        t=np.array(ts, dtype=np.int64),
        channels=np.array(rows, dtype=np.float64),
        behavior_events=tuple(events),
    )


def _read_header(reader, path) -> list[str]:
    try:
        return [c.strip() for c in next(reader)]
    except StopIteration:
        raise MissingColumn(f"{path}: empty file") from None


def missing_fraction(rec: EyeRecording) -> float:
    """Fraction of samples with any missing gaze field."""
    if len(rec) == 0:
        raise EmptyRecording("cannot compute missing fraction of empty recording")
    n_missing = sum(1 for s in rec.samples if s.missing)
    return n_missing / len(rec)


def exclude_or_keep(report: MissingReport, threshold: float = DEFAULT_EXCLUDE_THRESHOLD) -> bool:
    """True = exclude. Strict inequality: fraction == threshold is kept."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be in [0, 1]")
    return report.missing_fraction > threshold


def make_missing_report(
    subject_id: str, rec: EyeRecording, threshold: float = DEFAULT_EXCLUDE_THRESHOLD
) -> MissingReport:
    frac = missing_fraction(rec)
    return MissingReport(subject_id, frac, frac > threshold)


def _interp_column(t: np.ndarray, values: np.ndarray, name: str) -> np.ndarray:
    """Linear interpolation in time; boundary gaps use nearest-value extension."""
    present = np.isfinite(values)
    if not present.any():
        raise AllMissingField(f"column {name!r} has no present value")
    if present.all():
        return values
    # np.interp holds the boundary value constant outside the known range,
    # which is exactly the nearest-value extension rule.
    return np.interp(t.astype(np.float64), t[present].astype(np.float64), values[present])


def interpolate_gaps(rec):
    """Fill missing values by linear interpolation in time; idempotent."""
    if isinstance(rec, EegRecording):
        filled = rec.channels.copy()
        for c in range(filled.shape[1]):
            filled[:, c] = _interp_column(rec.t, filled[:, c], f"ch_{c:02d}")
        return EegRecording(rec.t, filled, rec.behavior_events)

    if isinstance(rec, EyeRecording):
        t = rec.timestamps()
        cols = {}
        for name in ("left_x", "left_y", "right_x", "right_y"):
            eye, axis = name.split("_")
            vals = np.array(
                [
                    getattr(getattr(s, eye) or GazePoint(math.nan, math.nan), axis)
                    for s in rec.samples
                ],
                dtype=np.float64,
            )
            cols[name] = _interp_column(t, vals, name)
        samples = tuple(
            EyeSample(
                s.t,
                GazePoint(cols["left_x"][i], cols["left_y"][i]),
                GazePoint(cols["right_x"][i], cols["right_y"][i]),
                s.event_type,
                s.behavior_event,
            )
            for i, s in enumerate(rec.samples)
        )
        return EyeRecording(samples)

    raise TypeError(f"unsupported recording type {type(rec)!r}")


def normalize_gaze(rec: EyeRecording) -> EyeRecording:
    """Min-max normalize gaze coordinates to [0,1] per recording.

    Applied after interpolation so every coordinate is present.  A constant
    coordinate maps to 0.5.
    """
    xs, ys = [], []
    for s in rec.samples:
        for p in (s.left, s.right):
            if p is not None:
                xs.append(p.x)
                ys.append(p.y)
    if not xs:
        raise EmptyRecording("no gaze points to normalize")
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)

    def norm(p: GazePoint | None) -> GazePoint | None:
        if p is None:
            return None
        x = (p.x - x_lo) / (x_hi - x_lo) if x_hi > x_lo else 0.5
        y = (p.y - y_lo) / (y_hi - y_lo) if y_hi > y_lo else 0.5
        return GazePoint(x, y)

    return EyeRecording(
        tuple(
            EyeSample(s.t, norm(s.left), norm(s.right), s.event_type, s.behavior_event)
            for s in rec.samples
        )
    )


def _extract_segments(events: list[tuple[int, str]]) -> list[VideoSegment]:
    open_starts: dict[int, int] = {}
    segments = []
    for t, label in events:
        m = _VIDEO_EVENT_RE.match(label)
        if not m:
            continue
        kind, vid = m.group(1), int(m.group(2))
        if kind == "start":
            if vid in open_starts:
                raise UnmatchedVideoEvent(f"video {vid}: repeated start without end")
            open_starts[vid] = t
        else:
            if vid not in open_starts:
                raise UnmatchedVideoEvent(f"video {vid}: end without start")
            segments.append(VideoSegment(vid, open_starts.pop(vid), t))
    if open_starts:
        vid = sorted(open_starts)[0]
        raise UnmatchedVideoEvent(f"video {vid}: start without end")
    segments.sort(key=lambda s: s.t_start)
    return segments


def segment_by_videos(rec):
    """Cut a recording into per-video sub-recordings via behavior event labels.

    Samples outside all [start, end] windows are dropped.  Segment
    boundaries are inclusive on both ends.
    """
    if isinstance(rec, EyeRecording):
        events = [
            (s.t, s.behavior_event) for s in rec.samples if s.behavior_event
        ]
        segments = _extract_segments(events)
        out = []
        for seg in segments:
            sub = tuple(
                s for s in rec.samples if seg.t_start <= s.t <= seg.t_end
            )
            out.append((seg, EyeRecording(sub)))
        return out

    if isinstance(rec, EegRecording):
        events = [
            (int(rec.t[i]), ev)
            for i, ev in enumerate(rec.behavior_events)
            if ev
        ]
        segments = _extract_segments(events)
        out = []
        for seg in segments:
            mask = (rec.t >= seg.t_start) & (rec.t <= seg.t_end)
            sub = EegRecording(
                rec.t[mask],
                rec.channels[mask],
                tuple(
                    ev for i, ev in enumerate(rec.behavior_events) if mask[i]
                ),
            )
            out.append((seg, sub))
        return out

    raise TypeError(f"unsupported recording type {type(rec)!r}")
