import * as tf from "@tensorflow/tfjs";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ensureBackend } from "../src/backend";
import {
  MODEL_KINDS,
  buildModel,
  buildTransformer,
  positionalLayer,
} from "../src/models";
import { predictProba, toModelInput, trainClassifier } from "../src/trainer";
import { separableRows } from "./helpers";

beforeAll(() => ensureBackend());

afterAll(() => {
  tf.disposeVariables();
});

describe("forward shapes", () => {
  for (const kind of MODEL_KINDS) {
    it(`${kind}: batch 64 -> logits 64x2`, () => {
      const model = buildModel(kind, 1);
      const shape = kind === "cnn" ? [64, 62, 5, 1] : [64, 62, 5];
      const x = tf.randomNormal(shape, 0, 1, "float32", 9);
      const logits = model.predict(x) as tf.Tensor;
      expect(logits.shape).toEqual([64, 2]);
      expect(Array.from(logits.dataSync()).every(Number.isFinite)).toBe(true);
      x.dispose();
      logits.dispose();
      model.dispose();
    });
  }
});

describe("training on the 64-sample separable batch", () => {
  const { rows, labels } = separableRows(64, 123);

  for (const kind of MODEL_KINDS) {
    it(`${kind}: loss decreases from epoch 0 to epoch 10`, async () => {
      const model = buildModel(kind, 2);
      const xs = toModelInput(rows, kind);
      const losses = await trainClassifier(model, xs, labels, {
        learningRate: 1e-3,
        epochs: 11,
        batchSize: 64,
        seed: 3,
      });
      expect(losses[10]).toBeLessThan(losses[0]);
      xs.dispose();
      model.dispose();
    });
  }

  it("transformer overfits to 100% train accuracy within 200 epochs", async () => {
    const model = buildTransformer(4);
    const xs = toModelInput(rows, "transformer");
    let reached = -1;
    for (let chunk = 0; chunk < 10; chunk++) {
      await trainClassifier(model, xs, labels, {
        learningRate: 1e-3,
        epochs: 20,
        batchSize: 64,
        seed: 5 + chunk,
      });
      const probs = predictProba(model, xs);
      const correct = probs.filter((p, i) => (p >= 0.5 ? 1 : 0) === labels[i]).length;
      if (correct === labels.length) {
        reached = (chunk + 1) * 20;
        break;
      }
    }
    xs.dispose();
    model.dispose();
    expect(reached, "epochs to 100% train accuracy").toBeGreaterThan(0);
    expect(reached).toBeLessThanOrEqual(200);
  });
});

describe("transformer token-permutation equivariance", () => {
  it("permuting tokens and positional rows together leaves logits unchanged", () => {
    const model = buildTransformer(6);
    const x = tf.randomNormal([4, 62, 5], 0, 1, "float32", 13);
    const before = (model.predict(x) as tf.Tensor).dataSync();

    // a fixed non-trivial permutation of the 62 token positions
    const perm: number[] = [];
    for (let i = 0; i < 62; i++) perm.push((i * 7 + 3) % 62);
    const permTensor = tf.tensor1d(perm, "int32");

    const layer = positionalLayer(model);
    const [pos] = layer.getWeights();
    layer.setWeights([tf.gather(pos, permTensor, 0)]);

    const xPerm = tf.gather(x, permTensor, 1);
    const after = (model.predict(xPerm) as tf.Tensor).dataSync();

    let maxDiff = 0;
    for (let i = 0; i < before.length; i++) {
      maxDiff = Math.max(maxDiff, Math.abs(before[i] - after[i]));
    }
    expect(maxDiff).toBeLessThan(1e-5);

    x.dispose();
    xPerm.dispose();
    permTensor.dispose();
    model.dispose();
  });
});
