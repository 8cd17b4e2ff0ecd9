"""Experimental protocols: repeated subject-dependent runs, leave-one-subject-out
cross-subject evaluation, per-band ablation, and aggregate exports."""

from __future__ import annotations

import csv
import math
from dataclasses import replace

import numpy as np

from .classify import (
    TrainConfig,
    compute_metrics,
    fit_standardizer,
    train_model,
)
from .dataset import SubjectDataset, balance_training, split_videos
from .model import (
    BANDS,
    N_CHANNELS,
    EvalReport,
    FocusLabel,
    FocusPipeError,
    RunMetrics,
)

BAND_CHOICES = [b.name.value for b in BANDS] + ["all"]


def _band_columns(band: str) -> slice:
    """Column range in the band-major 310-vector; 62 columns per band."""
    if band == "all":
        return slice(0, N_CHANNELS * len(BANDS))
    idx = [b.name.value for b in BANDS].index(band)
    return slice(idx * N_CHANNELS, (idx + 1) * N_CHANNELS)


def _matrix(slices, band: str) -> tuple[np.ndarray, np.ndarray]:
    cols = _band_columns(band)
    x = np.stack([sl.flat()[cols] for sl in slices])
    y = np.array([int(sl.label) for sl in slices], dtype=np.int64)
    return x, y


def _single_run(
    train_slices,
    test_slices,
    model_kind: str,
    cfg: TrainConfig,
    seed: int,
    band: str,
    hook=None,
    hook_info=None,
):
    balanced = balance_training(train_slices, seed)
    x_train, y_train = _matrix(balanced, band)
    x_test, y_test = _matrix(test_slices, band)

    scaler = fit_standardizer(x_train)
    x_train = scaler.transform(x_train)
    x_test = scaler.transform(x_test)

    run_cfg = replace(cfg, seed=seed, input_dim=x_train.shape[1])
    model = train_model(model_kind, x_train, y_train, run_cfg)
    probs = model.predict_proba(x_test)
    metrics = compute_metrics(y_test, probs)

    if hook is not None:
        info = dict(hook_info or {})
        info.update(
            train_label_counts={
                "focused": int(np.sum(y_train == FocusLabel.FOCUSED)),
                "unfocused": int(np.sum(y_train == FocusLabel.UNFOCUSED)),
            },
            test_label_counts={
                "focused": int(np.sum(y_test == FocusLabel.FOCUSED)),
                "unfocused": int(np.sum(y_test == FocusLabel.UNFOCUSED)),
            },
            scaler_fit_size=len(x_train),
        )
        hook(info)
    return metrics


def run_subject_dependent(
    ds: SubjectDataset,
    model_kind: str,
    cfg: TrainConfig,
    n_repeats: int = 20,
    band: str = "all",
    hook=None,
) -> EvalReport:
    """Video-level 7:3 split, balance train only, repeat n times with seeds
    base..base+n-1."""
    report = EvalReport(
        config={
            "protocol": "subject_dependent",
            "subject_id": ds.subject_id,
            "session": ds.session,
            "model": model_kind,
            "band": band,
            "n_repeats": n_repeats,
            "base_seed": cfg.seed,
            "learning_rate": cfg.learning_rate,
            "epochs": cfg.epochs,
            "batch_size": cfg.batch_size,
        }
    )
    for r in range(n_repeats):
        seed = cfg.seed + r
        plan = split_videos(ds.video_ids(), seed)
        train_slices = ds.slices_for(plan.train)
        test_slices = ds.slices_for(plan.test)
        metrics = _single_run(
            train_slices,
            test_slices,
            model_kind,
            cfg,
            seed,
            band,
            hook,
            {
                "protocol": "subject_dependent",
                "run": r,
                "train_videos": plan.train,
                "test_videos": plan.test,
            },
        )
        report.per_run.append(metrics)
    return report


def run_cross_subject(
    datasets: list[SubjectDataset],
    model_kind: str,
    cfg: TrainConfig,
    band: str = "all",
    hook=None,
) -> EvalReport:
    """One fold per held-out subject; sessions of a subject stay together."""
    subjects = sorted({ds.subject_id for ds in datasets})
    if len(subjects) < 2:
        raise FocusPipeError("cross-subject evaluation needs at least 2 subjects")
    report = EvalReport(
        config={
            "protocol": "cross_subject",
            "subjects": subjects,
            "model": model_kind,
            "band": band,
            "base_seed": cfg.seed,
            "learning_rate": cfg.learning_rate,
            "epochs": cfg.epochs,
            "batch_size": cfg.batch_size,
        }
    )
    for fold, held_out in enumerate(subjects):
        train_slices = [
            sl
            for ds in datasets
            if ds.subject_id != held_out
            for sl in ds.all_slices()
        ]
        test_slices = [
            sl for ds in datasets if ds.subject_id == held_out for sl in ds.all_slices()
        ]
        metrics = _single_run(
            train_slices,
            test_slices,
            model_kind,
            cfg,
            cfg.seed + fold,
            band,
            hook,
            {"protocol": "cross_subject", "fold": fold, "held_out": held_out},
        )
        report.per_run.append(metrics)
    return report


def run_band_ablation(
    ds: SubjectDataset,
    model_kind: str,
    cfg: TrainConfig,
    n_repeats: int = 20,
    hook=None,
) -> list[EvalReport]:
    """Five single-band runs plus the all-band run, identical hyperparameters."""
    return [
        run_subject_dependent(ds, model_kind, cfg, n_repeats, band, hook)
        for band in BAND_CHOICES
    ]


def aggregate_subject_reports(reports: list[EvalReport]) -> dict:
    """Subject-level means first, then mean/std across subjects."""
    out = {}
    for name in ("accuracy", "f1", "auc"):
        per_subject = [r.mean(name) for r in reports]
        per_subject = [v for v in per_subject if not math.isnan(v)]
        out[f"{name}_mean"] = float(np.mean(per_subject)) if per_subject else math.nan
        out[f"{name}_std"] = float(np.std(per_subject)) if per_subject else 0.0
    out["auc_absent_runs"] = sum(r.auc_absent_runs() for r in reports)
    return out


def _config_label(report: EvalReport) -> str:
    c = report.config
    parts = [c.get("protocol", "?"), c.get("model", "?"), c.get("band", "all")]
    if "subject_id" in c:
        parts.insert(1, f"{c['subject_id']}/s{c['session']}")
    return ":".join(str(p) for p in parts)


def write_report_csv(reports: list[EvalReport], path) -> None:
    """`config,run,accuracy,f1,auc,tp,fn,fp,tn` rows plus mean/std aggregate
    lines per config."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["config", "run", "accuracy", "f1", "auc", "tp", "fn", "fp", "tn"])
        for rep in reports:
            label = _config_label(rep)
            for i, m in enumerate(rep.per_run):
                w.writerow(
                    [
                        label,
                        i,
                        f"{m.accuracy:.6f}",
                        f"{m.f1:.6f}",
                        "" if m.auc is None else f"{m.auc:.6f}",
                        m.tp,
                        m.fn,
                        m.fp,
                        m.tn,
                    ]
                )
            for stat in ("mean", "std"):
                fn = rep.mean if stat == "mean" else rep.std
                w.writerow(
                    [
                        label,
                        stat,
                        f"{fn('accuracy'):.6f}",
                        f"{fn('f1'):.6f}",
                        f"{fn('auc'):.6f}",
                        "",
                        "",
                        "",
                        "",
                    ]
                )


def summed_confusion(report: EvalReport) -> np.ndarray:
    total = np.zeros((2, 2), dtype=np.int64)
    for m in report.per_run:
        total += m.confusion()
    return total


def export_confusion(report: EvalReport, path) -> None:
    """Summed 2x2 counts across runs plus row-normalized proportions."""
    counts = summed_confusion(report)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "true", "pred_focused", "pred_unfocused"])
        w.writerow(["counts", "focused", counts[0, 0], counts[0, 1]])
        w.writerow(["counts", "unfocused", counts[1, 0], counts[1, 1]])
        for i, state in enumerate(("focused", "unfocused")):
            row_sum = counts[i].sum()
            props = counts[i] / row_sum if row_sum else np.zeros(2)
            w.writerow(["proportions", state, f"{props[0]:.12f}", f"{props[1]:.12f}"])


def topomap_aggregates(slices) -> list[tuple[int, str, str, float, int]]:
    """Per (channel, band, state) mean DE over all slices of all subjects."""
    if not slices:
        raise FocusPipeError("no slices to aggregate")
    rows = []
    for state, label in (("focused", FocusLabel.FOCUSED), ("unfocused", FocusLabel.UNFOCUSED)):
        group = [sl for sl in slices if sl.label == label]
        n = len(group)
        mean = (
            np.mean(np.stack([sl.de for sl in group]), axis=0)
            if group
            else np.full((N_CHANNELS, len(BANDS)), math.nan)
        )
        for b, band in enumerate(BANDS):
            for c in range(N_CHANNELS):
                rows.append((c, band.name.value, state, float(mean[c, b]), n))
    return rows


def export_topomap_aggregates(slices, path) -> None:
    rows = topomap_aggregates(slices)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["channel", "band", "state", "mean_de", "n_slices"])
        for c, band, state, mean_de, n in rows:
            w.writerow([c, band, state, f"{mean_de:.12g}", n])
