/**
 * The three deep baselines over 62-channel x 5-band feature matrices:
 *
 * - CNN: three 3x3 same-padded conv layers (16/32/64 channels), one 2x2 max
 *   pool, two fully connected layers, on the matrix viewed as a 1x62x5 image.
 * - RNN: two bidirectional GRU layers (64 units per direction) over 62
 *   timesteps of 5 features, then two fully connected layers.
 * - Transformer: channels as 62 tokens of 5 features, linearly embedded to
 *   model width 32 (2 heads x head dim 16), learned positional embeddings,
 *   8 pre-norm encoder blocks with feed-forward hidden size 16, mean pooling,
 *   2-way head. The width-16 choices are recorded in the report config.
 *
 * All models emit raw 2-class logits; softmax happens at evaluation time.
 */

import * as tf from "@tensorflow/tfjs";

export type ModelKind = "cnn" | "rnn" | "transformer";

export const MODEL_KINDS: ModelKind[] = ["cnn", "rnn", "transformer"];

export const N_TOKENS = 62;
export const TOKEN_DIM = 5;
export const D_MODEL = 32;
export const N_HEADS = 2;
export const HEAD_DIM = 16;
export const D_FF = 16;
export const N_BLOCKS = 8;

/** Adds a learned [62, 32] positional table to the embedded tokens. */
class PositionalEmbedding extends tf.layers.Layer {
  static className = "PositionalEmbedding";
  private pos!: tf.LayerVariable;
  private readonly seed: number;

  constructor(seed: number) {
    super({ name: `pos_embedding_${seed}` });
    this.seed = seed;
  }

  override build(inputShape: tf.Shape | tf.Shape[]): void {
    const shape = inputShape as tf.Shape;
    this.pos = this.addWeight(
      "pos",
      [shape[1] as number, shape[2] as number],
      "float32",
      tf.initializers.randomNormal({ stddev: 0.02, seed: this.seed }),
    );
    super.build(inputShape);
  }

  override call(inputs: tf.Tensor | tf.Tensor[]): tf.Tensor {
    const x = Array.isArray(inputs) ? inputs[0] : inputs;
    return tf.add(x, this.pos.read());
  }

  override computeOutputShape(inputShape: tf.Shape): tf.Shape {
    return inputShape;
  }
}

function layerNorm(x: tf.Tensor, gamma: tf.Tensor, beta: tf.Tensor): tf.Tensor {
  const mean = x.mean(-1, true);
  const centered = x.sub(mean);
  const variance = centered.square().mean(-1, true);
  return centered.div(variance.add(1e-5).sqrt()).mul(gamma).add(beta);
}

/**
 * One pre-norm encoder block: x + MHA(LN(x)), then y + FFN(LN(y)).
 * Every op is per-token or attention over the full set, so permuting the
 * token order (together with the positional table) permutes the outputs.
 */
class EncoderBlock extends tf.layers.Layer {
  static className = "EncoderBlock";
  private wq!: tf.LayerVariable;
  private wk!: tf.LayerVariable;
  private wv!: tf.LayerVariable;
  private wo!: tf.LayerVariable;
  private w1!: tf.LayerVariable;
  private b1!: tf.LayerVariable;
  private w2!: tf.LayerVariable;
  private b2!: tf.LayerVariable;
  private ln1g!: tf.LayerVariable;
  private ln1b!: tf.LayerVariable;
  private ln2g!: tf.LayerVariable;
  private ln2b!: tf.LayerVariable;
  private readonly seed: number;

  constructor(index: number, seed: number) {
    super({ name: `encoder_block_${index}_${seed}` });
    this.seed = seed + index * 1000;
  }

  override build(inputShape: tf.Shape | tf.Shape[]): void {
    const init = (offset: number) => tf.initializers.glorotUniform({ seed: this.seed + offset });
    const d = D_MODEL;
    this.wq = this.addWeight("wq", [d, N_HEADS * HEAD_DIM], "float32", init(1));
    this.wk = this.addWeight("wk", [d, N_HEADS * HEAD_DIM], "float32", init(2));
    this.wv = this.addWeight("wv", [d, N_HEADS * HEAD_DIM], "float32", init(3));
    this.wo = this.addWeight("wo", [N_HEADS * HEAD_DIM, d], "float32", init(4));
    this.w1 = this.addWeight("w1", [d, D_FF], "float32", init(5));
    this.b1 = this.addWeight("b1", [D_FF], "float32", tf.initializers.zeros());
    this.w2 = this.addWeight("w2", [D_FF, d], "float32", init(6));
    this.b2 = this.addWeight("b2", [d], "float32", tf.initializers.zeros());
    this.ln1g = this.addWeight("ln1g", [d], "float32", tf.initializers.ones());
    this.ln1b = this.addWeight("ln1b", [d], "float32", tf.initializers.zeros());
    this.ln2g = this.addWeight("ln2g", [d], "float32", tf.initializers.ones());
    this.ln2b = this.addWeight("ln2b", [d], "float32", tf.initializers.zeros());
    super.build(inputShape);
  }

  override call(inputs: tf.Tensor | tf.Tensor[]): tf.Tensor {
    return tf.tidy(() => {
      const x = Array.isArray(inputs) ? inputs[0] : inputs;
      const [batch, tokens] = [x.shape[0], x.shape[1] as number];

      const project = (w: tf.LayerVariable, h: tf.Tensor) =>
        h
          .reshape([-1, D_MODEL])
          .matMul(w.read() as tf.Tensor2D)
          .reshape([batch, tokens, N_HEADS, HEAD_DIM])
          .transpose([0, 2, 1, 3]); // [B, heads, T, headDim]

      const h1 = layerNorm(x, this.ln1g.read(), this.ln1b.read());
      const q = project(this.wq, h1);
      const k = project(this.wk, h1);
      const v = project(this.wv, h1);
      const scores = tf.matMul(q, k, false, true).div(Math.sqrt(HEAD_DIM));
      const context = tf
        .matMul(tf.softmax(scores), v)
        .transpose([0, 2, 1, 3])
        .reshape([-1, N_HEADS * HEAD_DIM])
        .matMul(this.wo.read() as tf.Tensor2D)
        .reshape([batch, tokens, D_MODEL]);
      const y = x.add(context);

      const h2 = layerNorm(y, this.ln2g.read(), this.ln2b.read());
      const ff = h2
        .reshape([-1, D_MODEL])
        .matMul(this.w1.read() as tf.Tensor2D)
        .add(this.b1.read())
        .relu()
        .matMul(this.w2.read() as tf.Tensor2D)
        .add(this.b2.read())
        .reshape([batch, tokens, D_MODEL]);
      return y.add(ff);
    });
  }

  override computeOutputShape(inputShape: tf.Shape): tf.Shape {
    return inputShape;
  }
}

/**
 * 3x3 same-padded convolution + ReLU, expressed as im2col (pad, 9 shifted
 * slices, concat) followed by a matMul. Numerically identical to a stock
 * conv2d layer, but its gradient decomposes into pad/slice/concat/matMul,
 * all of which train on every available backend.
 */
class Conv3x3Relu extends tf.layers.Layer {
  static className = "Conv3x3Relu";
  private kernel!: tf.LayerVariable;
  private bias!: tf.LayerVariable;
  private readonly filters: number;
  private readonly seed: number;

  constructor(filters: number, name: string, seed: number) {
    super({ name });
    this.filters = filters;
    this.seed = seed;
  }

  override build(inputShape: tf.Shape | tf.Shape[]): void {
    const shape = inputShape as tf.Shape;
    const cIn = shape[3] as number;
    this.kernel = this.addWeight(
      "kernel",
      [9 * cIn, this.filters],
      "float32",
      tf.initializers.glorotUniform({ seed: this.seed }),
    );
    this.bias = this.addWeight("bias", [this.filters], "float32", tf.initializers.zeros());
    super.build(inputShape);
  }

  override call(inputs: tf.Tensor | tf.Tensor[]): tf.Tensor {
    return tf.tidy(() => {
      const x = (Array.isArray(inputs) ? inputs[0] : inputs) as tf.Tensor4D;
      const [batch, h, w, cIn] = x.shape;
      const padded = tf.pad(x, [
        [0, 0],
        [1, 1],
        [1, 1],
        [0, 0],
      ]);
      const shifts: tf.Tensor[] = [];
      for (let dy = 0; dy < 3; dy++) {
        for (let dx = 0; dx < 3; dx++) {
          shifts.push(padded.slice([0, dy, dx, 0], [batch, h, w, cIn]));
        }
      }
      const patches = tf.concat(shifts, 3).reshape([-1, 9 * cIn]);
      return patches
        .matMul(this.kernel.read() as tf.Tensor2D)
        .add(this.bias.read())
        .relu()
        .reshape([batch, h, w, this.filters]);
    });
  }

  override computeOutputShape(inputShape: tf.Shape): tf.Shape {
    const s = inputShape as tf.Shape;
    return [s[0], s[1], s[2], this.filters];
  }
}

/** 2x2 max pool via reshape + max so its gradient avoids MaxPoolGrad. */
class MaxPool2x2 extends tf.layers.Layer {
  static className = "MaxPool2x2";

  override call(inputs: tf.Tensor | tf.Tensor[]): tf.Tensor {
    return tf.tidy(() => {
      const x = (Array.isArray(inputs) ? inputs[0] : inputs) as tf.Tensor4D;
      const [batch, h, w, c] = x.shape;
      const [hOut, wOut] = [Math.floor(h / 2), Math.floor(w / 2)];
      const cropped = x.slice([0, 0, 0, 0], [batch, hOut * 2, wOut * 2, c]);
      return cropped.reshape([batch, hOut, 2, wOut, 2, c]).max([2, 4]);
    });
  }

  override computeOutputShape(inputShape: tf.Shape): tf.Shape {
    const s = inputShape as tf.Shape;
    return [s[0], Math.floor((s[1] as number) / 2), Math.floor((s[2] as number) / 2), s[3]];
  }
}

export function buildCnn(seed = 0): tf.LayersModel {
  const init = (offset: number) => tf.initializers.glorotUniform({ seed: seed + offset });
  const model = tf.sequential();
  model.add(tf.layers.inputLayer({ inputShape: [N_TOKENS, TOKEN_DIM, 1] }));
  model.add(new Conv3x3Relu(16, `conv1_${seed}`, seed + 1));
  model.add(new Conv3x3Relu(32, `conv2_${seed}`, seed + 2));
  model.add(new Conv3x3Relu(64, `conv3_${seed}`, seed + 3));
  model.add(new MaxPool2x2({}));
  model.add(tf.layers.flatten());
  model.add(tf.layers.dense({ units: 64, activation: "relu", kernelInitializer: init(4) }));
  model.add(tf.layers.dense({ units: 2, kernelInitializer: init(5) }));
  return model;
}

export function buildRnn(seed = 0): tf.LayersModel {
  const init = (offset: number) => tf.initializers.glorotUniform({ seed: seed + offset });
  const model = tf.sequential();
  model.add(
    tf.layers.bidirectional({
      inputShape: [N_TOKENS, TOKEN_DIM],
      layer: tf.layers.gru({
        units: 64,
        returnSequences: true,
        kernelInitializer: init(1),
      }) as tf.RNN,
      mergeMode: "concat",
    }),
  );
  model.add(
    tf.layers.bidirectional({
      layer: tf.layers.gru({
        units: 64,
        returnSequences: false,
        kernelInitializer: init(2),
      }) as tf.RNN,
      mergeMode: "concat",
    }),
  );
  model.add(tf.layers.dense({ units: 64, activation: "relu", kernelInitializer: init(3) }));
  model.add(tf.layers.dense({ units: 2, kernelInitializer: init(4) }));
  return model;
}

export function buildTransformer(seed = 0): tf.LayersModel {
  const init = (offset: number) => tf.initializers.glorotUniform({ seed: seed + offset });
  const input = tf.input({ shape: [N_TOKENS, TOKEN_DIM] });
  let x = tf.layers
    .dense({ units: D_MODEL, kernelInitializer: init(1), name: `embed_${seed}` })
    .apply(input) as tf.SymbolicTensor;
  x = new PositionalEmbedding(seed).apply(x) as tf.SymbolicTensor;
  for (let i = 0; i < N_BLOCKS; i++) {
    x = new EncoderBlock(i, seed).apply(x) as tf.SymbolicTensor;
  }
  x = tf.layers.layerNormalization({ axis: -1 }).apply(x) as tf.SymbolicTensor;
  x = tf.layers.globalAveragePooling1d({}).apply(x) as tf.SymbolicTensor;
  const logits = tf.layers
    .dense({ units: 2, kernelInitializer: init(2), name: `head_${seed}` })
    .apply(x) as tf.SymbolicTensor;
  return tf.model({ inputs: input, outputs: logits });
}

export function buildModel(kind: ModelKind, seed = 0): tf.LayersModel {
  switch (kind) {
    case "cnn":
      return buildCnn(seed);
    case "rnn":
      return buildRnn(seed);
    case "transformer":
      return buildTransformer(seed);
  }
}

/** The positional-embedding layer of a transformer built by buildTransformer. */
export function positionalLayer(model: tf.LayersModel): tf.layers.Layer {
  const layer = model.layers.find((l) => l.name.startsWith("pos_embedding"));
  if (!layer) throw new Error("model has no positional embedding layer");
  return layer;
}
