/**
 * Evaluation metrics matching the shallow harness: accuracy, F1 with the
 * focused class positive, tie-corrected rank AUC, and the 2x2 confusion in
 * (tp, fn, fp, tn) order.
 */

export interface RunMetrics {
  accuracy: number;
  f1: number;
  auc: number | null;
  tp: number;
  fn: number;
  fp: number;
  tn: number;
}

/** Mann-Whitney AUC from average ranks; ties contribute one half. */
export function aucMannWhitney(labels: readonly number[], scores: readonly number[]): number {
  const n = labels.length;
  let nPos = 0;
  for (const y of labels) if (y === 1) nPos++;
  const nNeg = n - nPos;
  if (nPos === 0 || nNeg === 0) {
    throw new Error("AUC undefined: only one class present");
  }
  const order = Array.from({ length: n }, (_, i) => i).sort((a, b) => scores[a] - scores[b]);
  const ranks = new Float64Array(n);
  let i = 0;
  let rank = 1;
  while (i < n) {
    let j = i;
    while (j + 1 < n && scores[order[j + 1]] === scores[order[i]]) j++;
    const avg = (rank + rank + (j - i)) / 2;
    for (let k = i; k <= j; k++) ranks[order[k]] = avg;
    rank += j - i + 1;
    i = j + 1;
  }
  let rankSumPos = 0;
  for (let k = 0; k < n; k++) if (labels[k] === 1) rankSumPos += ranks[k];
  const u = rankSumPos - (nPos * (nPos + 1)) / 2;
  return u / (nPos * nNeg);
}

/** Metrics from true labels (1 focused / 0 unfocused) and P(focused). */
export function computeMetrics(
  labels: readonly number[],
  probabilities: readonly number[],
): RunMetrics {
  if (labels.length === 0 || labels.length !== probabilities.length) {
    throw new Error("labels and probabilities must have equal nonzero length");
  }
  let tp = 0;
  let fn = 0;
  let fp = 0;
  let tn = 0;
  for (let i = 0; i < labels.length; i++) {
    const pred = probabilities[i] >= 0.5 ? 1 : 0;
    if (labels[i] === 1) {
      if (pred === 1) tp++;
      else fn++;
    } else {
      if (pred === 1) fp++;
      else tn++;
    }
  }
  const accuracy = (tp + tn) / labels.length;
  const denom = 2 * tp + fp + fn;
  const f1 = denom > 0 ? (2 * tp) / denom : 0;
  let auc: number | null;
  try {
    auc = aucMannWhitney(labels, probabilities);
  } catch {
    auc = null;
  }
  return { accuracy, f1, auc, tp, fn, fp, tn };
}

export function mean(values: readonly number[]): number {
  return values.reduce((a, b) => a + b, 0) / values.length;
}

/** Population standard deviation (divisor n). */
export function std(values: readonly number[]): number {
  const m = mean(values);
  return Math.sqrt(values.reduce((a, b) => a + (b - m) * (b - m), 0) / values.length);
}
