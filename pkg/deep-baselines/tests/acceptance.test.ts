/**
 * Release gate for the deep baselines, one test per criterion, each printing
 * an "ACCEPTANCE <name>: PASS/FAIL" line:
 *   - all three models produce 64x2 logits
 *   - the Transformer overfits a 64-sample separable batch within 200 epochs
 *   - video split vectors match the shared frozen fixture exactly
 *   - a full 20-repeat run on the exported synthetic corpus finishes in
 *     under 15 CPU-minutes with mean accuracy >= 0.90
 */

import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import * as tf from "@tensorflow/tfjs";
import { afterEach, beforeAll, beforeEach, describe, expect, it } from "vitest";

import { ensureBackend } from "../src/backend";
import { readDataset } from "../src/data";
import { MODEL_KINDS, buildModel, buildTransformer } from "../src/models";
import { predictProba, toModelInput, trainClassifier } from "../src/trainer";
import { splitVideos } from "../src/split";
import { main as cliMain } from "../src/cli";
import { separableRows } from "./helpers";

const DATASET = path.join(__dirname, "../fixtures/dataset_s01.csv");
const SPLIT_FIXTURE = path.join(__dirname, "../../tests/fixtures/split_vectors.json");

beforeAll(() => ensureBackend());

let started = 0;
beforeEach(() => {
  started = Date.now();
});
afterEach((ctx) => {
  const status = ctx.task.result?.state === "fail" ? "FAIL" : "PASS";
  const seconds = ((Date.now() - started) / 1000).toFixed(1);
  // eslint-disable-next-line no-console
  console.log(`ACCEPTANCE ${ctx.task.name}: ${status} (${seconds}s)`);
});

describe("deep-baselines acceptance", () => {
  it("logits_64x2_all_models", () => {
    for (const kind of MODEL_KINDS) {
      const model = buildModel(kind, 1);
      const shape = kind === "cnn" ? [64, 62, 5, 1] : [64, 62, 5];
      const x = tf.randomNormal(shape, 0, 1, "float32", 17);
      const logits = model.predict(x) as tf.Tensor;
      expect(logits.shape, kind).toEqual([64, 2]);
      x.dispose();
      logits.dispose();
      model.dispose();
    }
  });

  it("transformer_overfits_separable_batch_within_200_epochs", async () => {
    const { rows, labels } = separableRows(64, 321);
    const model = buildTransformer(8);
    const xs = toModelInput(rows, "transformer");
    let epochsUsed = 0;
    let perfect = false;
    while (epochsUsed < 200 && !perfect) {
      await trainClassifier(model, xs, labels, {
        learningRate: 1e-3,
        epochs: 20,
        batchSize: 64,
        seed: 100 + epochsUsed,
      });
      epochsUsed += 20;
      const probs = predictProba(model, xs);
      perfect = probs.every((p, i) => (p >= 0.5 ? 1 : 0) === labels[i]);
    }
    xs.dispose();
    model.dispose();
    expect(perfect, `not perfect after ${epochsUsed} epochs`).toBe(true);
    expect(epochsUsed).toBeLessThanOrEqual(200);
  });

  it("split_vectors_match_shared_fixture", () => {
    const fixture = JSON.parse(fs.readFileSync(SPLIT_FIXTURE, "utf-8"));
    for (const { seed, videos, train, test } of fixture.splits) {
      const plan = splitVideos(videos, seed);
      expect(plan.train, `seed ${seed}`).toEqual(train);
      expect(plan.test, `seed ${seed}`).toEqual(test);
    }
  });

  it("full_20_repeat_corpus_run_under_15_min_and_90_pct", async () => {
    const t0 = Date.now();
    const reportDir = fs.mkdtempSync(path.join(os.tmpdir(), "deep-acceptance-"));
    const code = await cliMain([
      "--dataset",
      DATASET,
      "--model",
      "transformer",
      "--repeats",
      "20",
      "--seed",
      "7",
      "--report",
      reportDir,
    ]);
    expect(code).toBe(0);

    const lines = fs
      .readFileSync(path.join(reportDir, "report.csv"), "utf-8")
      .trim()
      .split("\n");
    expect(lines[0]).toBe("config,run,accuracy,f1,auc,tp,fn,fp,tn");
    const runRows = lines.slice(1).filter((l) => /^\d+$/.test(l.split(",")[1]));
    expect(runRows.length).toBe(20);
    const meanRow = lines.find((l) => l.includes(",mean,"))!;
    const meanAccuracy = Number(meanRow.split(",")[2]);
    const elapsedMin = (Date.now() - t0) / 60000;

    // sanity: the dataset really is the exported interchange CSV
    expect(readDataset(DATASET)).toHaveLength(1);

    expect(meanAccuracy, `mean accuracy over 20 repeats`).toBeGreaterThanOrEqual(0.9);
    expect(elapsedMin, `elapsed minutes`).toBeLessThan(15);
  });
});
