import json
import os
import subprocess
import sys

import numpy as np
import pytest

from focuspipe.model import BANDS


def dft_oracle(x):
    """Brute-force O(n^2) DFT, independent of numpy's FFT path."""
    x = np.asarray(x, dtype=np.complex128)
    n = len(x)
    k = np.arange(n)
    w = np.exp(-2j * np.pi * np.outer(k, k) / n)
    return w @ x


def oracle_band_power(x, lo, hi, rate):
    """Band power via the DFT oracle and inline frequency enumeration."""
    n = len(x)
    spectrum = dft_oracle(x)
    total = 0.0
    for k in range(n):
        f = min(k, n - k) * rate / n
        if lo <= f <= hi:
            total += abs(spectrum[k]) ** 2
    return total / n


def oracle_de(x, band, rate):
    p = oracle_band_power(x, band.lo, band.hi, rate)
    return np.log2(max(p, 1e-12))


@pytest.fixture(scope="session")
def bands():
    return BANDS


def run_cli(*args, check=True):
    """Run the focuspipe CLI in a subprocess; returns CompletedProcess."""
    proc = subprocess.run(
        [sys.executable, "-m", "focuspipe.cli", *map(str, args)],
        capture_output=True,
        text=True,
    )
    if check and proc.returncode != 0:
        raise AssertionError(
            f"cli {' '.join(map(str, args))} failed ({proc.returncode}):\n"
            f"{proc.stdout}\n{proc.stderr}"
        )
    return proc


# Equal block lengths keep slice durations (and hence the length term of the
# DE formula) identical across classes, so only the planted gamma boost
# separates them; the trailing half cycle keeps the class counts imbalanced.
CORPUS_SPEC = {
    "n_videos": 10,
    "video_duration_s": 15.0,
    "eeg_rate": 500.0,
    "focused_block_ms": 3000,
    "unfocused_block_ms": 3000,
    "gaze_jitter": 0.005,
    "eeg_noise": 0.1,
    "event_corruption": 0.01,
}
CORPUS_RESAMPLE_HZ = 250.0


def build_corpus_dataset(root, subjects=("s01", "s02", "s03")):
    """synth -> ingest -> annotate -> features -> build-dataset for each subject.

    Returns {subject_id: dataset_csv_path}.
    """
    paths = {}
    for i, sid in enumerate(subjects):
        raw = os.path.join(root, f"raw_{sid}")
        work = os.path.join(root, f"work_{sid}")
        spec = dict(CORPUS_SPEC, subject_id=sid, seed=100 + i)
        spec_path = os.path.join(root, f"spec_{sid}.json")
        with open(spec_path, "w") as fh:
            json.dump(spec, fh)
        run_cli("synth", "--spec", spec_path, "--out", raw)
        run_cli(
            "ingest",
            "--eye", os.path.join(raw, "eye.csv"),
            "--eeg", os.path.join(raw, "eeg.csv"),
            "--subject", sid, "--session", 1, "--out", work,
        )
        run_cli("annotate", "--in", work)
        run_cli("features", "--in", work, "--resample-hz", CORPUS_RESAMPLE_HZ)
        out_csv = os.path.join(root, f"dataset_{sid}.csv")
        run_cli("build-dataset", "--in", work, "--out", out_csv)
        paths[sid] = out_csv
    return paths


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    """Three-subject, ten-video synthetic corpus with gamma-boosted focused blocks."""
    import time

    root = tmp_path_factory.mktemp("corpus")
    start = time.monotonic()
    paths = build_corpus_dataset(str(root))
    return {"datasets": paths, "build_seconds": time.monotonic() - start, "root": str(root)}
