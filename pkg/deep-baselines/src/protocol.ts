/**
 * Subject-dependent evaluation protocol, re-implemented to the shallow
 * harness's semantics: for repeat r with base seed s, split videos 7:3 with
 * seed s+r (shared splitmix64 contract), balance the training set to exactly
 * 50/50, standardize with training statistics only, train, evaluate on the
 * untouched test videos, and report per-run metrics plus mean/std rows.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import * as tf from "@tensorflow/tfjs";

import { ensureBackend } from "./backend";
import {
  Slice,
  SubjectData,
  balanceTraining,
  fitStandardizer,
  slicesFor,
  standardize,
  videoIds,
} from "./data";
import { RunMetrics, computeMetrics, mean, std } from "./metrics";
import { D_FF, D_MODEL, HEAD_DIM, ModelKind, N_HEADS, buildModel } from "./models";
import { TrainCfg, predictProba, toModelInput, trainClassifier } from "./trainer";
import { splitVideos } from "./split";

export interface EvalReport {
  config: Record<string, unknown>;
  perRun: RunMetrics[];
}

export interface RunHookInfo {
  run: number;
  trainVideos: number[];
  testVideos: number[];
  trainLabelCounts: { focused: number; unfocused: number };
  testLabelCounts: { focused: number; unfocused: number };
}

function labelCounts(labels: readonly number[]): { focused: number; unfocused: number } {
  let focused = 0;
  for (const y of labels) if (y === 1) focused++;
  return { focused, unfocused: labels.length - focused };
}

async function singleRun(
  trainSlices: readonly Slice[],
  testSlices: readonly Slice[],
  kind: ModelKind,
  cfg: TrainCfg,
  seed: number,
): Promise<{ metrics: RunMetrics; counts: RunHookInfo["trainLabelCounts"][] }> {
  const balanced = balanceTraining(trainSlices, seed);
  const trainY = balanced.map((s) => s.label);
  const testY = testSlices.map((s) => s.label);

  const scaler = fitStandardizer(balanced.map((s) => s.features));
  const trainRows = standardize(
    balanced.map((s) => s.features),
    scaler,
  );
  const testRows = standardize(
    testSlices.map((s) => s.features),
    scaler,
  );

  const xTrain = toModelInput(trainRows, kind);
  const xTest = toModelInput(testRows, kind);
  const model = buildModel(kind, seed);
  try {
    await trainClassifier(model, xTrain, trainY, { ...cfg, seed });
    const probs = predictProba(model, xTest);
    return {
      metrics: computeMetrics(testY, probs),
      counts: [labelCounts(trainY), labelCounts(testY)],
    };
  } finally {
    xTrain.dispose();
    xTest.dispose();
    model.dispose();
  }
}

export async function runSubjectDependent(
  data: SubjectData,
  kind: ModelKind,
  cfg: TrainCfg,
  nRepeats: number,
  hook?: (info: RunHookInfo) => void,
): Promise<EvalReport> {
  await ensureBackend();
  const report: EvalReport = {
    config: {
      protocol: "subject_dependent",
      subject_id: data.subjectId,
      session: data.session,
      model: kind,
      band: "all",
      n_repeats: nRepeats,
      base_seed: cfg.seed,
      learning_rate: cfg.learningRate,
      epochs: cfg.epochs,
      batch_size: cfg.batchSize,
      transformer_dims: { d_model: D_MODEL, heads: N_HEADS, head_dim: HEAD_DIM, d_ff: D_FF },
    },
    perRun: [],
  };
  for (let r = 0; r < nRepeats; r++) {
    const seed = cfg.seed + r;
    const plan = splitVideos(videoIds(data), seed);
    const { metrics, counts } = await singleRun(
      slicesFor(data, plan.train),
      slicesFor(data, plan.test),
      kind,
      cfg,
      seed,
    );
    report.perRun.push(metrics);
    hook?.({
      run: r,
      trainVideos: plan.train,
      testVideos: plan.test,
      trainLabelCounts: counts[0],
      testLabelCounts: counts[1],
    });
  }
  return report;
}

function configLabel(report: EvalReport): string {
  const c = report.config;
  return [
    c.protocol,
    `${c.subject_id}/s${c.session}`,
    c.model,
    c.band ?? "all",
  ].join(":");
}

function fmt(v: number): string {
  return Number.isNaN(v) ? "nan" : v.toFixed(6);
}

/** Same row schema as the shallow harness: config,run,accuracy,f1,auc,tp,fn,fp,tn. */
export function writeReportCsv(reports: readonly EvalReport[], file: string): void {
  const lines = ["config,run,accuracy,f1,auc,tp,fn,fp,tn"];
  for (const report of reports) {
    const label = configLabel(report);
    report.perRun.forEach((m, i) => {
      lines.push(
        [
          label,
          i,
          fmt(m.accuracy),
          fmt(m.f1),
          m.auc === null ? "" : fmt(m.auc),
          m.tp,
          m.fn,
          m.fp,
          m.tn,
        ].join(","),
      );
    });
    const aucs = report.perRun.filter((m) => m.auc !== null).map((m) => m.auc!);
    for (const stat of ["mean", "std"] as const) {
      const agg = stat === "mean" ? mean : std;
      lines.push(
        [
          label,
          stat,
          fmt(agg(report.perRun.map((m) => m.accuracy))),
          fmt(agg(report.perRun.map((m) => m.f1))),
          fmt(aucs.length ? agg(aucs) : NaN),
          "",
          "",
          "",
          "",
        ].join(","),
      );
    }
  }
  fs.writeFileSync(file, lines.join("\n") + "\n");
}

export function writeAggregateJson(reports: readonly EvalReport[], file: string): void {
  const out: Record<string, unknown> = {};
  for (const name of ["accuracy", "f1", "auc"] as const) {
    const perSubject = reports
      .map((r) => {
        const values =
          name === "auc"
            ? r.perRun.filter((m) => m.auc !== null).map((m) => m.auc!)
            : r.perRun.map((m) => m[name]);
        return values.length ? mean(values) : NaN;
      })
      .filter((v) => !Number.isNaN(v));
    out[`${name}_mean`] = perSubject.length ? mean(perSubject) : null;
    out[`${name}_std`] = perSubject.length ? std(perSubject) : 0;
  }
  fs.mkdirSync(path.dirname(file), { recursive: true });
  fs.writeFileSync(file, JSON.stringify(out, null, 1) + "\n");
}

/** Keep the tfjs engine from accumulating state across long runs. */
export function engineTensorCount(): number {
  return tf.memory().numTensors;
}
