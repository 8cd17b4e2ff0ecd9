"""Command-line entry point: one executable, one subcommand per pipeline stage."""

from __future__ import annotations

import argparse
import csv
import glob
import json
import os
import sys

import numpy as np

from . import annotate as annotate_mod
from . import ingest as ingest_mod
from .classify import TrainConfig
from .dataset import (
    SCHEMA_VERSION,
    SubjectDataset,
    export_dataset,
    import_dataset,
)
from .features import (
    DEFAULT_MIN_SLICE_MS,
    DEFAULT_RESAMPLE_HZ,
    resample_eeg,
    slice_by_labels,
    slice_features,
)
from .harness import (
    BAND_CHOICES,
    aggregate_subject_reports,
    export_confusion,
    export_topomap_aggregates,
    run_band_ablation,
    run_cross_subject,
    run_subject_dependent,
    topomap_aggregates,
    write_report_csv,
)
from .model import EvalReport, FocusLabel, FocusLabelSeries, FocusPipeError
from .synth import SessionSpec, generate_session, spec_from_file

MODELS = ["logreg", "svm", "mlp"]


def _echo_config(out_dir, name: str, cfg: dict) -> None:
    """Every subcommand drops its fully resolved config next to its outputs."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, f"{name}_config.json"), "w", encoding="utf-8") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True, default=str)


def _apply_config_file(args, argv) -> None:
    """Merge a flat key=value config file under the explicit flags."""
    if not getattr(args, "config", None):
        return
    with open(args.config, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, raw = line.partition("=")
            key = key.strip().replace("-", "_")
            raw = raw.strip().strip("\"'")
            if not hasattr(args, key):
                raise FocusPipeError(f"config file: unknown key {key!r}")
            flag = "--" + key.replace("_", "-")
            if flag in argv:
                continue  # explicit flag wins
            current = getattr(args, key)
            if isinstance(current, bool):
                value = raw.lower() in ("1", "true", "yes")
            elif isinstance(current, int):
                value = int(raw)
            elif isinstance(current, float):
                value = float(raw)
            else:
                value = raw
            setattr(args, key, value)


def cmd_synth(args) -> int:
    spec = spec_from_file(args.spec) if args.spec else SessionSpec()
    if args.seed is not None:
        spec.seed = args.seed
    spec.validate()
    generate_session(spec, args.out)
    _echo_config(args.out, "synth", {"spec": spec.__dict__, "out": args.out})
    return 0


def cmd_ingest(args) -> int:
    eye = ingest_mod.parse_eye_csv(args.eye)
    eeg = ingest_mod.parse_eeg_csv(args.eeg)

    eye_frac = ingest_mod.missing_fraction(eye)
    eeg_frac = float(np.mean(np.any(~np.isfinite(eeg.channels), axis=1)))
    excluded = eye_frac > args.exclude_threshold

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "missing_report.json"), "w", encoding="utf-8") as fh:
        json.dump(
            {
                "subject_id": args.subject,
                "session": args.session,
                "eye_missing_fraction": eye_frac,
                "eeg_missing_fraction": eeg_frac,
                "exclude_threshold": args.exclude_threshold,
                "excluded": excluded,
            },
            fh,
            indent=2,
        )
    _echo_config(args.out, "ingest", vars(args))
    if excluded:
        print(
            f"subject {args.subject} session {args.session} excluded: "
            f"{eye_frac:.1%} missing eye samples",
            file=sys.stderr,
        )
        return 0

    eye = ingest_mod.normalize_gaze(ingest_mod.interpolate_gaps(eye))
    eeg = ingest_mod.interpolate_gaps(eeg)

    with open(os.path.join(args.out, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump({"subject_id": args.subject, "session": args.session}, fh)

    for seg, sub in ingest_mod.segment_by_videos(eye):
        path = os.path.join(args.out, f"eye_video_{seg.video_id:02d}.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(ingest_mod.EYE_COLUMNS)
            for s in sub.samples:
                w.writerow(
                    [
                        s.t,
                        f"{s.left.x:.9g}",
                        f"{s.left.y:.9g}",
                        f"{s.right.x:.9g}",
                        f"{s.right.y:.9g}",
                        s.event_type.value,
                        s.behavior_event or "",
                    ]
                )
    for seg, sub in ingest_mod.segment_by_videos(eeg):
        path = os.path.join(args.out, f"eeg_video_{seg.video_id:02d}.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(ingest_mod.EEG_COLUMNS)
            for i in range(len(sub)):
                w.writerow(
                    [int(sub.t[i])]
                    + [f"{v:.9g}" for v in sub.channels[i]]
                    + [sub.behavior_events[i] or ""]
                )
    return 0


def _video_id_of(path: str) -> int:
    stem = os.path.splitext(os.path.basename(path))[0]
    return int(stem.rsplit("_", 1)[1])


def cmd_annotate(args) -> int:
    eye_files = sorted(glob.glob(os.path.join(args.in_dir, "eye_video_*.csv")))
    if not eye_files:
        raise FocusPipeError(f"no eye_video_*.csv under {args.in_dir}")
    for path in eye_files:
        vid = _video_id_of(path)
        segment = ingest_mod.parse_eye_csv(path)
        labels = annotate_mod.annotate_video(segment, args.min_unfocused_ms)
        out = os.path.join(args.in_dir, f"labels_video_{vid:02d}.csv")
        with open(out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["timestamp_ms", "label"])
            for i in range(len(labels)):
                w.writerow(
                    [
                        int(labels.t[i]),
                        "focused" if labels.label[i] == FocusLabel.FOCUSED else "unfocused",
                    ]
                )
        if args.dump_debug:
            dbg = os.path.join(args.in_dir, f"debug_video_{vid:02d}.csv")
            with open(dbg, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(
                    ["timestamp_ms", "disparity", "raw_label", "corrected_label", "final_label"]
                )
                for row in annotate_mod.annotation_debug_rows(segment, args.min_unfocused_ms):
                    w.writerow(row)
    _echo_config(args.in_dir, "annotate", vars(args))
    return 0


def _read_labels_csv(path) -> FocusLabelSeries:
    ts, labels = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            ts.append(int(row[0]))
            labels.append(FocusLabel.FOCUSED if row[1] == "focused" else FocusLabel.UNFOCUSED)
    return FocusLabelSeries(np.array(ts, dtype=np.int64), np.array(labels, dtype=np.int8))


def cmd_features(args) -> int:
    meta_path = os.path.join(args.in_dir, "meta.json")
    if not os.path.exists(meta_path):
        raise FocusPipeError(f"missing meta.json under {args.in_dir}; run ingest first")
    with open(meta_path, encoding="utf-8") as fh:
        meta = json.load(fh)
    ds = SubjectDataset(meta["subject_id"], meta["session"])

    eeg_files = sorted(glob.glob(os.path.join(args.in_dir, "eeg_video_*.csv")))
    if not eeg_files:
        raise FocusPipeError(f"no eeg_video_*.csv under {args.in_dir}")
    for path in eeg_files:
        vid = _video_id_of(path)
        label_path = os.path.join(args.in_dir, f"labels_video_{vid:02d}.csv")
        if not os.path.exists(label_path):
            raise FocusPipeError(f"missing {label_path}; run annotate first")
        eeg = resample_eeg(ingest_mod.parse_eeg_csv(path), args.resample_hz)
        labels = _read_labels_csv(label_path)
        for i, sl in enumerate(slice_by_labels(eeg, labels, args.min_slice_ms)):
            ds.add(
                slice_features(
                    sl,
                    subject_id=meta["subject_id"],
                    session=meta["session"],
                    video_id=vid,
                    slice_index=i,
                )
            )
    export_dataset(ds, os.path.join(args.in_dir, "features.csv"))
    _echo_config(args.in_dir, "features", vars(args))
    return 0


def cmd_build_dataset(args) -> int:
    datasets = []
    for in_dir in args.in_dirs:
        path = os.path.join(in_dir, "features.csv")
        if not os.path.exists(path):
            raise FocusPipeError(f"missing {path}; run features first")
        datasets.extend(import_dataset(path))
    export_dataset(datasets, args.out)
    _echo_config(os.path.dirname(os.path.abspath(args.out)) or ".", "build_dataset", vars(args))
    return 0


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
    )


def cmd_train_eval(args) -> int:
    from . import plots

    datasets = import_dataset(args.dataset)
    cfg = _train_config(args)
    reports = [
        run_subject_dependent(ds, args.model, cfg, args.repeats, args.band)
        for ds in datasets
    ]
    os.makedirs(args.report, exist_ok=True)
    write_report_csv(reports, os.path.join(args.report, "report.csv"))
    combined = EvalReport(config={"model": args.model, "band": args.band})
    for rep in reports:
        combined.per_run.extend(rep.per_run)
    export_confusion(combined, os.path.join(args.report, "confusion.csv"))
    plots.render_confusion(combined, os.path.join(args.report, "confusion.png"))
    plots.render_metrics_per_run(combined, os.path.join(args.report, "metrics_per_run.png"))
    agg = aggregate_subject_reports(reports)
    with open(os.path.join(args.report, "aggregate.json"), "w", encoding="utf-8") as fh:
        json.dump(agg, fh, indent=2)
    _echo_config(args.report, "train_eval", vars(args))
    print(f"accuracy {agg['accuracy_mean']:.4f} +/- {agg['accuracy_std']:.4f}")
    return 0


def cmd_cross_subject(args) -> int:
    from . import plots

    datasets = []
    for path in args.datasets:
        datasets.extend(import_dataset(path))
    cfg = _train_config(args)
    report = run_cross_subject(datasets, args.model, cfg, args.band)
    os.makedirs(args.report, exist_ok=True)
    write_report_csv([report], os.path.join(args.report, "report.csv"))
    export_confusion(report, os.path.join(args.report, "confusion.csv"))
    plots.render_confusion(report, os.path.join(args.report, "confusion.png"))
    _echo_config(args.report, "cross_subject", vars(args))
    print(f"accuracy {report.mean('accuracy'):.4f} +/- {report.std('accuracy'):.4f}")
    return 0


def cmd_ablate(args) -> int:
    from . import plots

    datasets = import_dataset(args.dataset)
    cfg = _train_config(args)
    all_reports = []
    merged_by_band = {band: EvalReport(config={"band": band, "model": args.model}) for band in BAND_CHOICES}
    for ds in datasets:
        for rep in run_band_ablation(ds, args.model, cfg, args.repeats):
            all_reports.append(rep)
            merged_by_band[rep.config["band"]].per_run.extend(rep.per_run)
    os.makedirs(args.report, exist_ok=True)
    write_report_csv(all_reports, os.path.join(args.report, "report.csv"))
    merged = [merged_by_band[band] for band in BAND_CHOICES]
    write_report_csv(merged, os.path.join(args.report, "report_by_band.csv"))
    plots.render_band_ablation(merged, os.path.join(args.report, "band_ablation.png"))
    _echo_config(args.report, "ablate", vars(args))
    for rep in merged:
        print(f"{rep.config['band']}: accuracy {rep.mean('accuracy'):.4f}")
    return 0


def cmd_topomap(args) -> int:
    from . import plots

    slices = []
    for path in args.datasets:
        for ds in import_dataset(path):
            slices.extend(ds.all_slices())
    export_topomap_aggregates(slices, args.out)
    fig_path = os.path.splitext(args.out)[0] + ".png"
    plots.render_topomap(topomap_aggregates(slices), fig_path)
    _echo_config(os.path.dirname(os.path.abspath(args.out)) or ".", "topomap", vars(args))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="focuspipe",
        description="Focused-state annotation and EEG classification pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key=value config file merged under flags")

    p = sub.add_parser("synth", help="generate a synthetic session")
    p.add_argument("--spec", help="JSON session spec (defaults used if omitted)")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="parse, exclude, interpolate, segment")
    p.add_argument("--eye", required=True)
    p.add_argument("--eeg", required=True)
    p.add_argument("--subject", required=True)
    p.add_argument("--session", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--exclude-threshold", type=float, default=ingest_mod.DEFAULT_EXCLUDE_THRESHOLD)
    add_common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("annotate", help="focused-state labels from eye segments")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--min-unfocused-ms", type=float, default=annotate_mod.DEFAULT_MIN_UNFOCUSED_MS)
    p.add_argument("--dump-debug", action="store_true")
    add_common(p)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("features", help="resample, slice, extract DE features")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--resample-hz", type=float, default=DEFAULT_RESAMPLE_HZ)
    p.add_argument("--min-slice-ms", type=float, default=DEFAULT_MIN_SLICE_MS)
    add_common(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("build-dataset", help=f"merge features into a {SCHEMA_VERSION} CSV")
    p.add_argument("--in", dest="in_dirs", action="append", required=True)
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(func=cmd_build_dataset)

    def add_train_flags(p):
        p.add_argument("--model", choices=MODELS, required=True)
        p.add_argument("--band", choices=BAND_CHOICES, default="all")
        p.add_argument("--seed", type=int, default=7)
        p.add_argument("--learning-rate", type=float, default=1e-3)
        p.add_argument("--epochs", type=int, default=100)
        p.add_argument("--batch-size", type=int, default=64)
        p.add_argument("--report", required=True)
        add_common(p)

    p = sub.add_parser("train-eval", help="repeated subject-dependent evaluation")
    p.add_argument("--dataset", required=True)
    p.add_argument("--repeats", type=int, default=20)
    add_train_flags(p)
    p.set_defaults(func=cmd_train_eval)

    p = sub.add_parser("cross-subject", help="leave-one-subject-out evaluation")
    p.add_argument("--datasets", nargs="+", required=True)
    add_train_flags(p)
    p.set_defaults(func=cmd_cross_subject)

    p = sub.add_parser("ablate", help="five single-band runs plus all-band")
    p.add_argument("--dataset", required=True)
    p.add_argument("--repeats", type=int, default=20)
    add_train_flags(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("topomap", help="mean DE per channel/band/state")
    p.add_argument("--datasets", nargs="+", required=True)
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(func=cmd_topomap)

    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args, argv)
        return args.func(args)
    except (FocusPipeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
