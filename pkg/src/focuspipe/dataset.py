"""Dataset assembly, interchange CSV, video-level splits, class balancing."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .model import (
    BANDS,
    N_BANDS,
    N_CHANNELS,
    ClassAbsent,
    FeatureSlice,
    FocusLabel,
    MalformedRow,
    SchemaVersionMismatch,
    TooFewVideos,
)

SCHEMA_VERSION = "focuspipe-v1"

_DE_COLUMNS = [
    f"de_{band.name.value}_ch{c:02d}" for band in BANDS for c in range(N_CHANNELS)
]
HEADER = [
    "subject_id",
    "session",
    "video_id",
    "slice_index",
    "t_start_ms",
    "t_end_ms",
    "label",
] + _DE_COLUMNS


@dataclass
class SubjectDataset:
    subject_id: str
    session: int
    videos: dict[int, list[FeatureSlice]] = field(default_factory=dict)

    def add(self, sl: FeatureSlice) -> None:
        self.videos.setdefault(sl.video_id, []).append(sl)

    def video_ids(self) -> list[int]:
        return sorted(self.videos)

    def all_slices(self) -> list[FeatureSlice]:
        return [sl for vid in self.video_ids() for sl in self.videos[vid]]

    def slices_for(self, video_ids) -> list[FeatureSlice]:
        wanted = set(video_ids)
        return [sl for vid in self.video_ids() if vid in wanted for sl in self.videos[vid]]


@dataclass(frozen=True)
class SplitPlan:
    train: tuple[int, ...]
    test: tuple[int, ...]
    seed: int


_M64 = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4B1C15) & _M64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    z = z ^ (z >> 31)
    return state, z


def _shuffled(items: list[int], seed: int) -> list[int]:
    """Fisher-Yates with a splitmix64 stream.

    Deliberately avoids numpy's RNG: any consumer of the interchange CSV
    must be able to reproduce the exact same video partitions from the
    seed alone, in any language.
    """
    out = list(items)
    state = seed & _M64
    for i in range(len(out) - 1, 0, -1):
        state, z = _splitmix64(state)
        j = z % (i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def split_videos(video_ids, seed: int) -> SplitPlan:
    """Shuffle video ids and split 7:3 (proportional with floor below 10)."""
    ids = sorted(set(video_ids))
    n = len(ids)
    if n < 2:
        raise TooFewVideos(f"need at least 2 videos, got {n}")
    shuffled = _shuffled(ids, seed)
    n_test = max(1, n * 3 // 10)
    test = tuple(sorted(shuffled[:n_test]))
    train = tuple(sorted(shuffled[n_test:]))
    return SplitPlan(train=train, test=test, seed=seed)


def balance_training(slices: list[FeatureSlice], seed: int) -> list[FeatureSlice]:
    """Resize both classes to the midpoint target ceil((n_f + n_u) / 2).

    Minority upsampled with replacement, majority downsampled without;
    output shuffled.  Never synthesizes new feature vectors.
    """
    focused = [s for s in slices if s.label == FocusLabel.FOCUSED]
    unfocused = [s for s in slices if s.label == FocusLabel.UNFOCUSED]
    if not focused or not unfocused:
        raise ClassAbsent(
            f"need both classes: {len(focused)} focused, {len(unfocused)} unfocused"
        )
    target = -(-(len(focused) + len(unfocused)) // 2)  # ceil
    rng = np.random.default_rng(seed)

    def resize(group: list[FeatureSlice]) -> list[FeatureSlice]:
        if len(group) == target:
            return list(group)
        if len(group) < target:
            idx = rng.integers(0, len(group), size=target)
        else:
            idx = rng.permutation(len(group))[:target]
        return [group[i] for i in idx]

    out = resize(focused) + resize(unfocused)
    order = rng.permutation(len(out))
    return [out[i] for i in order]


def export_dataset(datasets, path) -> None:
    """Write one or more SubjectDatasets to the versioned interchange CSV."""
    if isinstance(datasets, SubjectDataset):
        datasets = [datasets]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {SCHEMA_VERSION}\n")
        writer = csv.writer(fh)
        writer.writerow(HEADER)
        for ds in datasets:
            for sl in ds.all_slices():
                row = [
                    sl.subject_id,
                    sl.session,
                    sl.video_id,
                    sl.slice_index,
                    sl.t_start,
                    sl.t_end,
                    "focused" if sl.label == FocusLabel.FOCUSED else "unfocused",
                ]
                row.extend(f"{v:.17g}" for v in sl.flat())
                writer.writerow(row)


def import_dataset(path) -> list[SubjectDataset]:
    """Read an interchange CSV; returns one SubjectDataset per (subject, session)."""
    groups: dict[tuple[str, int], SubjectDataset] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != f"# {SCHEMA_VERSION}":
            raise SchemaVersionMismatch(
                f"{path}: expected '# {SCHEMA_VERSION}' header, got {first!r}"
            )
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != HEADER:
            missing = set(HEADER) - set(header or [])
            raise MalformedRow(f"{path}: bad header; missing columns {sorted(missing)[:3]}")
        for row_no, row in enumerate(reader, start=3):
            if not row:
                continue
            if len(row) != len(HEADER):
                raise MalformedRow(
                    f"{path}: row {row_no} has {len(row)} fields, expected {len(HEADER)}"
                )
            try:
                subject_id = row[0]
                session = int(row[1])
                video_id = int(row[2])
                slice_index = int(row[3])
                t_start = int(row[4])
                t_end = int(row[5])
                label = {"focused": FocusLabel.FOCUSED, "unfocused": FocusLabel.UNFOCUSED}[
                    row[6]
                ]
                flat = np.array([float(v) for v in row[7:]], dtype=np.float64)
            except (ValueError, KeyError) as exc:
                raise MalformedRow(f"{path}: row {row_no}: {exc}") from exc
            de = flat.reshape(N_BANDS, N_CHANNELS).T
            sl = FeatureSlice(
                subject_id=subject_id,
                session=session,
                video_id=video_id,
                slice_index=slice_index,
                t_start=t_start,
                t_end=t_end,
                label=label,
                de=np.ascontiguousarray(de),
            )
            key = (subject_id, session)
            if key not in groups:
                groups[key] = SubjectDataset(subject_id, session)
            groups[key].add(sl)
    return [groups[k] for k in sorted(groups)]
