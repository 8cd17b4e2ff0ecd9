"""Core domain types shared by all pipeline stages. No I/O, no algorithms."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

N_CHANNELS = 62
N_BANDS = 5


class FocusPipeError(Exception):
    """Base class for all pipeline errors."""


class MissingColumn(FocusPipeError):
    pass


class NonMonotonicTimestamp(FocusPipeError):
    pass


class ChannelCountMismatch(FocusPipeError):
    pass


class EmptyRecording(FocusPipeError):
    pass


class AllMissingField(FocusPipeError):
    pass


class UnmatchedVideoEvent(FocusPipeError):
    pass


class LengthMismatch(FocusPipeError):
    pass


class NonIntegerDecimation(FocusPipeError):
    pass


class ClockMismatch(FocusPipeError):
    pass


class EmptyBand(FocusPipeError):
    pass


class TooFewVideos(FocusPipeError):
    pass


class ClassAbsent(FocusPipeError):
    pass


class SchemaVersionMismatch(FocusPipeError):
    pass


class MalformedRow(FocusPipeError):
    pass


class DimensionMismatch(FocusPipeError):
    pass


class NonFiniteLoss(FocusPipeError):
    pass


class SingleClassAUC(FocusPipeError):
    pass


class InvalidSpec(FocusPipeError):
    pass


class GazeEvent(enum.Enum):
    FIXATION = "Fixation"
    SACCADE = "Saccade"
    UNCLASSIFIED = "Unclassified"


class FocusLabel(enum.IntEnum):
    UNFOCUSED = 0
    FOCUSED = 1


@dataclass(frozen=True)
class GazePoint:
    x: float
    y: float


@dataclass(frozen=True)
class EyeSample:
    t: int  # ms since recording start
    left: GazePoint | None
    right: GazePoint | None
    event_type: GazeEvent
    behavior_event: str | None = None

    @property
    def missing(self) -> bool:
        return self.left is None or self.right is None


@dataclass(frozen=True)
class EyeRecording:
    samples: tuple[EyeSample, ...]

    def __len__(self) -> int:
        return len(self.samples)

    def timestamps(self) -> np.ndarray:
        return np.array([s.t for s in self.samples], dtype=np.int64)


@dataclass(frozen=True)
class EegRecording:
    """62-channel EEG; `channels` is (n_samples, 62), NaN marks missing."""

    t: np.ndarray  # int64 ms, strictly increasing
    channels: np.ndarray  # float64 (n, 62)
    behavior_events: tuple[str | None, ...] = ()

    def __post_init__(self):
        if self.channels.ndim != 2 or self.channels.shape[1] != N_CHANNELS:
            raise ChannelCountMismatch(
                f"expected {N_CHANNELS} channels, got {self.channels.shape}"
            )

    def __len__(self) -> int:
        return len(self.t)

    @property
    def sample_period_ms(self) -> float:
        if len(self.t) < 2:
            raise EmptyRecording("need at least 2 samples to infer the clock")
        return float(np.median(np.diff(self.t)))


@dataclass(frozen=True)
class VideoSegment:
    video_id: int
    t_start: int
    t_end: int

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise FocusPipeError(f"video {self.video_id}: t_start >= t_end")


@dataclass(frozen=True)
class FocusLabelSeries:
    t: np.ndarray  # int64 ms
    label: np.ndarray  # FocusLabel values as int8

    def __post_init__(self):
        if len(self.t) != len(self.label):
            raise LengthMismatch("timestamps and labels differ in length")

    def __len__(self) -> int:
        return len(self.t)


class BandName(enum.Enum):
    DELTA = "delta"
    THETA = "theta"
    ALPHA = "alpha"
    BETA = "beta"
    GAMMA = "gamma"


@dataclass(frozen=True)
class Band:
    name: BandName
    lo: float  # Hz
    hi: float  # Hz


# Fixed canonical order used by every feature matrix and export.
BANDS: tuple[Band, ...] = (
    Band(BandName.DELTA, 1.0, 3.0),
    Band(BandName.THETA, 4.0, 7.0),
    Band(BandName.ALPHA, 8.0, 13.0),
    Band(BandName.BETA, 14.0, 30.0),
    Band(BandName.GAMMA, 31.0, 50.0),
)

BAND_BY_NAME: dict[str, Band] = {b.name.value: b for b in BANDS}


def band_bins(band: Band, sample_rate: float, n: int) -> set[int]:
    """Two-sided DFT bin indices whose frequency falls inside `band`.

    Bin k of a length-n DFT at `sample_rate` corresponds to frequency
    min(k, n-k) * sample_rate / n; both endpoints of the band are
    inclusive.  Returns the empty set when n is too short to resolve
    the band (callers must handle it).
    """
    if sample_rate <= 0:
        raise ValueError("sample_rate must be positive")
    if n < 2:
        raise ValueError("n must be >= 2")
    bins = set()
    for k in range(n):
        f = min(k, n - k) * sample_rate / n
        if band.lo <= f <= band.hi:
            bins.add(k)
    return bins


@dataclass(frozen=True)
class FeatureSlice:
    subject_id: str
    session: int
    video_id: int
    slice_index: int
    t_start: int
    t_end: int
    label: FocusLabel
    de: np.ndarray  # (62, 5), bits, band order delta..gamma

    def __post_init__(self):
        if self.de.shape != (N_CHANNELS, N_BANDS):
            raise DimensionMismatch(f"de must be 62x5, got {self.de.shape}")
        if not np.all(np.isfinite(self.de)):
            raise FocusPipeError("non-finite DE entries")

    def flat(self) -> np.ndarray:
        """Band-major flattening: delta ch00..61, theta ch00..61, ..."""
        return np.ascontiguousarray(self.de.T).reshape(-1)


@dataclass(frozen=True)
class RunMetrics:
    accuracy: float
    f1: float
    auc: float | None  # None when the test set is single-class
    tp: int
    fn: int
    fp: int
    tn: int

    def confusion(self) -> np.ndarray:
        return np.array([[self.tp, self.fn], [self.fp, self.tn]], dtype=np.int64)


@dataclass
class EvalReport:
    config: dict
    per_run: list[RunMetrics] = field(default_factory=list)

    def _values(self, name: str) -> list[float]:
        vals = [getattr(m, name) for m in self.per_run]
        return [v for v in vals if v is not None]

    def mean(self, name: str) -> float:
        vals = self._values(name)
        return float(np.mean(vals)) if vals else math.nan

    def std(self, name: str) -> float:
        vals = self._values(name)
        return float(np.std(vals)) if vals else 0.0

    def auc_absent_runs(self) -> int:
        return sum(1 for m in self.per_run if m.auc is None)
