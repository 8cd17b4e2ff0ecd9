"""Synthetic eye + EEG session generator with planted ground truth.

Produces exactly the ingest CSV schemas plus ground_truth.csv, so the whole
pipeline can be verified end to end against a known focus schedule.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field, asdict

import numpy as np

from .model import N_CHANNELS, InvalidSpec

# Fixed in-band frequencies (Hz): keeps per-band power analytically predictable.
BAND_FREQS = {
    "delta": (1.5, 2.5),
    "theta": (5.0, 6.0),
    "alpha": (10.0, 12.0),
    "beta": (20.0, 25.0),
    "gamma": (35.0, 40.0, 45.0),
}


@dataclass
class SessionSpec:
    subject_id: str = "s01"
    session: int = 1
    n_videos: int = 10
    video_duration_s: float = 12.0
    gap_ms: int = 500
    eye_rate: float = 120.0
    eeg_rate: float = 1000.0
    focused_block_ms: int = 3000
    unfocused_block_ms: int = 1500
    disparity_focused: float = 0.01
    disparity_unfocused: float = 0.2
    gaze_jitter: float = 0.0
    band_amplitude: dict = field(
        default_factory=lambda: {b: 1.0 for b in BAND_FREQS}
    )
    focused_band_boost: dict = field(default_factory=lambda: {"gamma": 2.0})
    eeg_noise: float = 0.1
    missing_rate: float = 0.0
    event_corruption: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.video_duration_s <= 0:
            raise InvalidSpec("video duration must be positive")
        if not 1 <= self.n_videos <= 10:
            raise InvalidSpec("n_videos must be in 1..10")
        if self.eye_rate <= 0 or self.eeg_rate <= 0:
            raise InvalidSpec("sampling rates must be positive")
        if self.focused_block_ms <= 0 or self.unfocused_block_ms < 0:
            raise InvalidSpec("block durations must be positive")
        if not 0 <= self.missing_rate < 1:
            raise InvalidSpec("missing_rate must be in [0, 1)")
        for name in self.band_amplitude:
            if name not in BAND_FREQS:
                raise InvalidSpec(f"unknown band {name!r}")
        for name in self.focused_band_boost:
            if name not in BAND_FREQS:
                raise InvalidSpec(f"unknown band {name!r}")


def spec_from_file(path) -> SessionSpec:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    spec = SessionSpec(**data)
    spec.validate()
    return spec


def _focused_mask(t_ms: np.ndarray, video_start: int, spec: SessionSpec) -> np.ndarray:
    cycle = spec.focused_block_ms + spec.unfocused_block_ms
    if spec.unfocused_block_ms == 0:
        return np.ones(len(t_ms), dtype=bool)
    elapsed = t_ms - video_start
    return (elapsed % cycle) < spec.focused_block_ms


def generate_session(spec: SessionSpec, out_dir) -> dict:
    """Write eye.csv, eeg.csv, ground_truth.csv; returns the file paths."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    os.makedirs(out_dir, exist_ok=True)

    video_ms = int(round(spec.video_duration_s * 1000))
    eye_period = 1000.0 / spec.eye_rate
    eeg_period = 1000.0 / spec.eeg_rate
    n_eye = int(video_ms // eye_period)
    n_eeg = int(video_ms // eeg_period)
    if n_eye < 2 or n_eeg < 2:
        raise InvalidSpec("video too short for the sampling rates")

    eye_path = os.path.join(out_dir, "eye.csv")
    eeg_path = os.path.join(out_dir, "eeg.csv")
    gt_path = os.path.join(out_dir, "ground_truth.csv")

    with open(eye_path, "w", newline="", encoding="utf-8") as f_eye, open(
        eeg_path, "w", newline="", encoding="utf-8"
    ) as f_eeg, open(gt_path, "w", newline="", encoding="utf-8") as f_gt:
        w_eye = csv.writer(f_eye)
        w_eeg = csv.writer(f_eeg)
        w_gt = csv.writer(f_gt)
        w_eye.writerow(
            ["timestamp_ms", "left_x", "left_y", "right_x", "right_y",
             "gaze_event_type", "behavior_event"]
        )
        w_eeg.writerow(
            ["timestamp_ms"]
            + [f"ch_{i:02d}" for i in range(N_CHANNELS)]
            + ["behavior_event"]
        )
        w_gt.writerow(["timestamp_ms", "state"])

        t_cursor = 0
        for vid in range(1, spec.n_videos + 1):
            start = t_cursor
            eye_t = start + np.round(np.arange(n_eye) * eye_period).astype(np.int64)
            eeg_t = start + np.round(np.arange(n_eeg) * eeg_period).astype(np.int64)
            end = int(max(eye_t[-1], eeg_t[-1]))

            focused_eye = _focused_mask(eye_t, start, spec)
            focused_eeg = _focused_mask(eeg_t, start, spec)

            _write_eye_video(w_eye, w_gt, eye_t, focused_eye, vid, spec, rng)
            _write_eeg_video(w_eeg, eeg_t, focused_eeg, vid, start, spec, rng)

            t_cursor = end + spec.gap_ms

    with open(os.path.join(out_dir, "session.json"), "w", encoding="utf-8") as fh:
        json.dump(asdict(spec), fh, indent=2)
    return {"eye": eye_path, "eeg": eeg_path, "ground_truth": gt_path}


def _write_eye_video(w_eye, w_gt, eye_t, focused, vid, spec, rng):
    n = len(eye_t)
    base = np.full((n, 2), 0.5)
    angle = rng.uniform(0, 2 * np.pi, size=n)
    mag = np.where(focused, spec.disparity_focused, spec.disparity_unfocused)
    offset = np.stack([mag * np.cos(angle), mag * np.sin(angle)], axis=1)
    left = base + rng.normal(0, spec.gaze_jitter, size=(n, 2))
    right = base + offset + rng.normal(0, spec.gaze_jitter, size=(n, 2))

    fixation = focused.copy()
    corrupt = rng.random(n) < spec.event_corruption
    fixation ^= corrupt
    missing = rng.random(n) < spec.missing_rate

    for i in range(n):
        event = ""
        if i == 0:
            event = f"video_start:{vid}"
        elif i == n - 1:
            event = f"video_end:{vid}"
        if missing[i]:
            cells = ["", "", "", ""]
        else:
            cells = [
                f"{left[i, 0]:.6f}",
                f"{left[i, 1]:.6f}",
                f"{right[i, 0]:.6f}",
                f"{right[i, 1]:.6f}",
            ]
        w_eye.writerow(
            [int(eye_t[i])]
            + cells
            + ["Fixation" if fixation[i] else "Saccade", event]
        )
        w_gt.writerow([int(eye_t[i]), "focused" if focused[i] else "unfocused"])


def _write_eeg_video(w_eeg, eeg_t, focused, vid, start, spec, rng):
    n = len(eeg_t)
    t_sec = (eeg_t - start) / 1000.0
    signal = np.zeros((n, N_CHANNELS))
    for name, freqs in BAND_FREQS.items():
        amp = spec.band_amplitude.get(name, 1.0)
        boost = spec.focused_band_boost.get(name, 1.0)
        gain = amp * np.where(focused, boost, 1.0)
        comp = np.zeros((n, N_CHANNELS))
        for f in freqs:
            phase = rng.uniform(0, 2 * np.pi, size=N_CHANNELS)
            wt = 2 * np.pi * f * t_sec
            comp += np.sin(wt)[:, None] * np.cos(phase)[None, :]
            comp += np.cos(wt)[:, None] * np.sin(phase)[None, :]
        signal += gain[:, None] * comp
    if spec.eeg_noise > 0:
        signal += rng.normal(0, spec.eeg_noise, size=signal.shape)

    for i in range(n):
        event = ""
        if i == 0:
            event = f"video_start:{vid}"
        elif i == n - 1:
            event = f"video_end:{vid}"
        w_eeg.writerow(
            [int(eeg_t[i])] + [f"{v:.5f}" for v in signal[i]] + [event]
        )
