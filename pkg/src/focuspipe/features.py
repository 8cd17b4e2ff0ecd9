"""EEG alignment, label-contiguous slicing, and differential-entropy features."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .model import (
    BANDS,
    N_BANDS,
    N_CHANNELS,
    Band,
    ClockMismatch,
    EegRecording,
    EmptyBand,
    FeatureSlice,
    FocusLabel,
    FocusLabelSeries,
    NonIntegerDecimation,
    band_bins,
)

log = logging.getLogger(__name__)

DEFAULT_RESAMPLE_HZ = 200.0
DEFAULT_MIN_SLICE_MS = 1000.0
POWER_FLOOR = 1e-12


@dataclass(frozen=True)
class LabeledEegSlice:
    label: FocusLabel
    data: np.ndarray  # (n_samples, 62)
    t_start: int
    t_end: int
    sample_rate: float


def resample_eeg(rec: EegRecording, target_rate: float = DEFAULT_RESAMPLE_HZ) -> EegRecording:
    """Block-mean decimation to target_rate; timestamps rebuilt on the target clock.

    The source rate must be an integer multiple of the target rate.
    """
    src_period = rec.sample_period_ms
    src_rate = 1000.0 / src_period
    if target_rate > src_rate + 1e-9:
        raise NonIntegerDecimation(
            f"target rate {target_rate} Hz exceeds source rate {src_rate:.3f} Hz"
        )
    ratio = src_rate / target_rate
    if abs(ratio - round(ratio)) > 1e-6:
        raise NonIntegerDecimation(
            f"source rate {src_rate:.3f} Hz is not an integer multiple of {target_rate} Hz"
        )
    ratio = int(round(ratio))
    if ratio == 1:
        return rec
    n_out = len(rec) // ratio
    if n_out == 0:
        return EegRecording(rec.t[:0], rec.channels[:0], ())
    blocks = rec.channels[: n_out * ratio].reshape(n_out, ratio, N_CHANNELS)
    out = blocks.mean(axis=1)
    period_ms = 1000.0 / target_rate
    t0 = int(rec.t[0])
    t = t0 + np.round(np.arange(n_out) * period_ms).astype(np.int64)
    return EegRecording(t, out, ())


def align_labels(
    eeg: EegRecording, labels: FocusLabelSeries
) -> tuple[np.ndarray, np.ndarray]:
    """Assign each EEG sample the nearest label in time.

    Tolerance is half the label clock's median sample period plus half a
    millisecond of integer-rounding slack.  EEG samples that fall outside
    the label span by more than the tolerance are dropped; interior
    samples beyond tolerance raise ClockMismatch.  Returns (keep mask,
    per-kept-sample labels).
    """
    if len(labels) == 0:
        raise ClockMismatch("empty label series")
    lt = labels.t.astype(np.float64)
    et = eeg.t.astype(np.float64)
    tol = (float(np.median(np.diff(lt))) / 2.0 + 0.5) if len(lt) > 1 else 0.5

    idx = np.searchsorted(lt, et)
    idx_lo = np.clip(idx - 1, 0, len(lt) - 1)
    idx_hi = np.clip(idx, 0, len(lt) - 1)
    pick = np.where(
        np.abs(et - lt[idx_lo]) <= np.abs(et - lt[idx_hi]), idx_lo, idx_hi
    )
    dist = np.abs(et - lt[pick])

    inside = (et >= lt[0]) & (et <= lt[-1])
    bad_inside = inside & (dist > tol)
    if bad_inside.any():
        i = int(np.argmax(bad_inside))
        raise ClockMismatch(
            f"EEG sample at t={int(eeg.t[i])} ms is {dist[i]:.1f} ms from the "
            f"nearest label (tolerance {tol:.1f} ms)"
        )
    keep = dist <= tol
    return keep, labels.label[pick[keep]]


def slice_by_labels(
    eeg: EegRecording,
    labels: FocusLabelSeries,
    min_slice_ms: float = DEFAULT_MIN_SLICE_MS,
) -> list[LabeledEegSlice]:
    """One slice per maximal constant-label run; short runs are dropped."""
    keep, sample_labels = align_labels(eeg, labels)
    t = eeg.t[keep]
    data = eeg.channels[keep]
    if len(t) == 0:
        return []
    period_ms = 1000.0 / _rate_of(eeg)

    slices = []
    change = np.flatnonzero(np.diff(sample_labels)) + 1
    bounds = np.concatenate(([0], change, [len(sample_labels)]))
    for i in range(len(bounds) - 1):
        a, b = int(bounds[i]), int(bounds[i + 1])
        duration = (b - a) * period_ms
        if duration < min_slice_ms:
            log.warning(
                "dropping %d ms %s slice at t=%d (min %d ms)",
                int(duration),
                FocusLabel(sample_labels[a]).name.lower(),
                int(t[a]),
                int(min_slice_ms),
            )
            continue
        slices.append(
            LabeledEegSlice(
                label=FocusLabel(int(sample_labels[a])),
                data=data[a:b],
                t_start=int(t[a]),
                t_end=int(t[b - 1]),
                sample_rate=_rate_of(eeg),
            )
        )
    return slices


def _rate_of(eeg: EegRecording) -> float:
    return 1000.0 / eeg.sample_period_ms


def band_power(samples: np.ndarray, band: Band, sample_rate: float) -> float:
    """Mean band power: sum of |DFT|^2 over the band's two-sided bins, / n."""
    n = len(samples)
    if n < 2:
        raise ValueError("need at least 2 samples")
    bins = band_bins(band, sample_rate, n)
    if not bins:
        raise EmptyBand(
            f"band {band.name.value} unresolvable at n={n}, rate={sample_rate} Hz"
        )
    spectrum = np.fft.fft(samples)
    idx = np.fromiter(bins, dtype=np.int64)
    return float(np.sum(np.abs(spectrum[idx]) ** 2) / n)


def differential_entropy(samples: np.ndarray, band: Band, sample_rate: float) -> float:
    """log2 of mean band power, floored at 1e-12 before the log."""
    power = band_power(samples, band, sample_rate)
    return math.log2(max(power, POWER_FLOOR))


def slice_features(
    sl: LabeledEegSlice,
    subject_id: str = "",
    session: int = 1,
    video_id: int = 0,
    slice_index: int = 0,
) -> FeatureSlice:
    """62x5 DE matrix for one slice; band order delta..gamma, channels 0..61.

    An unresolvable band (too-short slice) contributes the floor value
    log2(1e-12) for every channel and is flagged with a warning.
    """
    n = sl.data.shape[0]
    de = np.empty((N_CHANNELS, N_BANDS))
    spectra = np.fft.fft(sl.data, axis=0)  # (n, 62)
    power = np.abs(spectra) ** 2
    for b, band in enumerate(BANDS):
        bins = band_bins(band, sl.sample_rate, n)
        if not bins:
            log.warning(
                "slice t=%d: band %s unresolvable (n=%d); using floor value",
                sl.t_start,
                band.name.value,
                n,
            )
            de[:, b] = math.log2(POWER_FLOOR)
            continue
        idx = np.fromiter(bins, dtype=np.int64)
        p = power[idx].sum(axis=0) / n
        de[:, b] = np.log2(np.maximum(p, POWER_FLOOR))
    return FeatureSlice(
        subject_id=subject_id,
        session=session,
        video_id=video_id,
        slice_index=slice_index,
        t_start=sl.t_start,
        t_end=sl.t_end,
        label=sl.label,
        de=de,
    )
