/**
 * Shared training loop: Adam (0.9 / 0.999 / 1e-8), batch size 64, softmax
 * cross-entropy on logits, deterministic epoch shuffling, and a divergence
 * guard that aborts on a non-finite loss.
 */

import * as tf from "@tensorflow/tfjs";

import { N_FEATURES, N_CHANNELS, N_BANDS } from "./data";
import { ModelKind } from "./models";
import { SplitMix } from "./split";

export class NonFiniteLoss extends Error {}

export interface TrainCfg {
  learningRate: number;
  epochs: number;
  batchSize: number;
  seed: number;
}

export const DEFAULT_CFG: TrainCfg = {
  learningRate: 1e-3,
  epochs: 30,
  batchSize: 64,
  seed: 7,
};

/**
 * Band-major 310-vectors -> [n, 62, 5] token tensor (row = channel, columns
 * delta..gamma) or [n, 62, 5, 1] for the CNN's image view.
 */
export function toModelInput(rows: readonly Float64Array[], kind: ModelKind): tf.Tensor {
  const n = rows.length;
  const data = new Float32Array(n * N_FEATURES);
  for (let i = 0; i < n; i++) {
    const row = rows[i];
    const base = i * N_FEATURES;
    for (let c = 0; c < N_CHANNELS; c++) {
      for (let b = 0; b < N_BANDS; b++) {
        data[base + c * N_BANDS + b] = row[b * N_CHANNELS + c];
      }
    }
  }
  const tokens = tf.tensor3d(data, [n, N_CHANNELS, N_BANDS]);
  if (kind === "cnn") {
    const image = tokens.reshape([n, N_CHANNELS, N_BANDS, 1]);
    tokens.dispose();
    return image;
  }
  return tokens;
}

/** Train in place; returns the mean loss per epoch. */
export async function trainClassifier(
  model: tf.LayersModel,
  xs: tf.Tensor,
  labels: readonly number[],
  cfg: TrainCfg,
): Promise<number[]> {
  const optimizer = tf.train.adam(cfg.learningRate, 0.9, 0.999, 1e-8);
  const ys = tf.oneHot(tf.tensor1d(Array.from(labels), "int32"), 2);
  // LayerVariable.val is the underlying tf.Variable; it is typed protected
  // but minimize() needs the raw variables of exactly this model, so other
  // live models in the same engine are never touched.
  const vars = model.trainableWeights.map(
    (w) => (w as unknown as { val: tf.Variable }).val,
  );
  const n = labels.length;
  const rng = new SplitMix(cfg.seed);
  const losses: number[] = [];
  try {
    for (let epoch = 0; epoch < cfg.epochs; epoch++) {
      const order = Array.from({ length: n }, (_, i) => i);
      for (let i = n - 1; i > 0; i--) {
        const j = rng.nextBelow(i + 1);
        [order[i], order[j]] = [order[j], order[i]];
      }
      let epochLoss = 0;
      let nBatches = 0;
      for (let start = 0; start < n; start += cfg.batchSize) {
        const idx = order.slice(start, start + cfg.batchSize);
        const lossValue = tf.tidy(() => {
          const indexTensor = tf.tensor1d(idx, "int32");
          const xBatch = tf.gather(xs, indexTensor);
          const yBatch = tf.gather(ys, indexTensor);
          const loss = optimizer.minimize(
            () =>
              tf.losses.softmaxCrossEntropy(
                yBatch,
                model.apply(xBatch, { training: true }) as tf.Tensor,
              ) as tf.Scalar,
            true,
            vars,
          )!;
          return loss.dataSync()[0];
        });
        if (!Number.isFinite(lossValue)) {
          throw new NonFiniteLoss(`loss became ${lossValue} at epoch ${epoch}`);
        }
        epochLoss += lossValue;
        nBatches++;
      }
      losses.push(epochLoss / nBatches);
      await tf.nextFrame();
    }
  } finally {
    ys.dispose();
    optimizer.dispose();
  }
  return losses;
}

/** P(focused) for each row: softmax over the 2-class logits, column 1. */
export function predictProba(model: tf.LayersModel, xs: tf.Tensor): number[] {
  return tf.tidy(() => {
    const logits = model.predict(xs) as tf.Tensor2D;
    const probs = tf.softmax(logits, -1);
    const flat = probs.dataSync();
    const out: number[] = [];
    for (let i = 0; i < probs.shape[0]; i++) out.push(flat[i * 2 + 1]);
    return out;
  });
}
