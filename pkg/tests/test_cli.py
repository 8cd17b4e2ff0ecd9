import csv
import json
import os

import pytest

from conftest import run_cli


@pytest.fixture(scope="module")
def pipeline_dir(tmp_path_factory):
    """One small subject run through the whole CLI chain."""
    root = tmp_path_factory.mktemp("cli")
    spec = {
        "subject_id": "c01",
        "n_videos": 4,
        "video_duration_s": 10.0,
        "eeg_rate": 500.0,
        "seed": 21,
    }
    spec_path = root / "spec.json"
    spec_path.write_text(json.dumps(spec))
    run_cli("synth", "--spec", spec_path, "--out", root / "raw")
    run_cli(
        "ingest",
        "--eye", root / "raw" / "eye.csv",
        "--eeg", root / "raw" / "eeg.csv",
        "--subject", "c01", "--out", root / "work",
    )
    run_cli("annotate", "--in", root / "work", "--dump-debug")
    run_cli("features", "--in", root / "work", "--resample-hz", 250)
    run_cli("build-dataset", "--in", root / "work", "--out", root / "dataset.csv")
    return root


def test_smoke_chain_then_train_eval(pipeline_dir):
    report = pipeline_dir / "rep"
    proc = run_cli(
        "train-eval",
        "--dataset", pipeline_dir / "dataset.csv",
        "--model", "logreg", "--repeats", 2, "--epochs", 10,
        "--report", report,
    )
    assert proc.returncode == 0
    for name in ("report.csv", "confusion.csv", "confusion.png",
                 "metrics_per_run.png", "aggregate.json", "train_eval_config.json"):
        assert (report / name).exists(), name


def test_unknown_model_exits_2(pipeline_dir):
    proc = run_cli(
        "train-eval", "--dataset", pipeline_dir / "dataset.csv",
        "--model", "forest", "--report", pipeline_dir / "r2",
        check=False,
    )
    assert proc.returncode == 2
    assert "usage" in proc.stderr.lower()


def test_ablate_emits_six_band_configs(pipeline_dir):
    report = pipeline_dir / "ablate"
    run_cli(
        "ablate", "--dataset", pipeline_dir / "dataset.csv",
        "--model", "logreg", "--repeats", 2, "--epochs", 10,
        "--report", report,
    )
    with open(report / "report_by_band.csv") as fh:
        rows = list(csv.DictReader(fh))
    bands = {r["config"].split(":")[-1] for r in rows}
    assert bands == {"delta", "theta", "alpha", "beta", "gamma", "all"}
    assert (report / "band_ablation.png").exists()


def test_debug_dump_written(pipeline_dir):
    dumps = [p for p in os.listdir(pipeline_dir / "work") if p.startswith("debug_video_")]
    assert len(dumps) == 4
    with open(pipeline_dir / "work" / dumps[0]) as fh:
        header = fh.readline().strip()
    assert header == "timestamp_ms,disparity,raw_label,corrected_label,final_label"


def test_config_echoed_with_defaults(pipeline_dir):
    with open(pipeline_dir / "work" / "features_config.json") as fh:
        cfg = json.load(fh)
    assert cfg["resample_hz"] == 250
    assert cfg["min_slice_ms"] == 1000


def test_config_file_merged_under_flags(pipeline_dir, tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("repeats = 2\nepochs = 5\nseed = 11\n")
    report = tmp_path / "rep"
    run_cli(
        "train-eval", "--dataset", pipeline_dir / "dataset.csv",
        "--model", "logreg", "--epochs", 10,  # flag beats config file
        "--config", cfg_file, "--report", report,
    )
    with open(report / "train_eval_config.json") as fh:
        resolved = json.load(fh)
    assert resolved["repeats"] == 2
    assert resolved["seed"] == 11
    assert resolved["epochs"] == 10


def test_cross_subject_and_topomap(pipeline_dir, tmp_path):
    # second subject from a different seed, same pipeline
    root = tmp_path
    spec = {
        "subject_id": "c02",
        "n_videos": 4,
        "video_duration_s": 10.0,
        "eeg_rate": 500.0,
        "seed": 22,
    }
    spec_path = root / "spec.json"
    spec_path.write_text(json.dumps(spec))
    run_cli("synth", "--spec", spec_path, "--out", root / "raw")
    run_cli(
        "ingest", "--eye", root / "raw" / "eye.csv", "--eeg", root / "raw" / "eeg.csv",
        "--subject", "c02", "--out", root / "work",
    )
    run_cli("annotate", "--in", root / "work")
    run_cli("features", "--in", root / "work", "--resample-hz", 250)
    run_cli("build-dataset", "--in", root / "work", "--out", root / "ds2.csv")

    report = root / "cross"
    run_cli(
        "cross-subject",
        "--datasets", pipeline_dir / "dataset.csv", root / "ds2.csv",
        "--model", "logreg", "--epochs", 10, "--report", report,
    )
    with open(report / "report.csv") as fh:
        rows = [r for r in csv.DictReader(fh) if r["run"].isdigit()]
    assert len(rows) == 2  # one fold per subject

    out_csv = root / "topo.csv"
    run_cli("topomap", "--datasets", pipeline_dir / "dataset.csv", root / "ds2.csv", "--out", out_csv)
    with open(out_csv) as fh:
        n_rows = sum(1 for _ in fh) - 1
    assert n_rows == 62 * 5 * 2
    assert (root / "topo.png").exists()


def test_excluded_subject_writes_report_only(tmp_path):
    spec = {
        "subject_id": "c03",
        "n_videos": 2,
        "video_duration_s": 8.0,
        "eeg_rate": 250.0,
        "missing_rate": 0.5,
        "seed": 23,
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    run_cli("synth", "--spec", spec_path, "--out", tmp_path / "raw")
    proc = run_cli(
        "ingest", "--eye", tmp_path / "raw" / "eye.csv", "--eeg", tmp_path / "raw" / "eeg.csv",
        "--subject", "c03", "--out", tmp_path / "work",
    )
    assert proc.returncode == 0
    assert "excluded" in proc.stderr
    with open(tmp_path / "work" / "missing_report.json") as fh:
        report = json.load(fh)
    assert report["excluded"] is True
    assert not any(
        p.startswith("eye_video_") for p in os.listdir(tmp_path / "work")
    )
