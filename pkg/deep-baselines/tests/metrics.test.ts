import { describe, expect, it } from "vitest";

import { aucMannWhitney, computeMetrics } from "../src/metrics";
import { SplitMix } from "../src/split";
import { uniform } from "./helpers";

/** Pair-counting AUC oracle: P(score_pos > score_neg) + 0.5 P(tie). */
function aucPairCount(labels: number[], scores: number[]): number {
  let wins = 0;
  let pairs = 0;
  for (let i = 0; i < labels.length; i++) {
    if (labels[i] !== 1) continue;
    for (let j = 0; j < labels.length; j++) {
      if (labels[j] !== 0) continue;
      pairs++;
      if (scores[i] > scores[j]) wins += 1;
      else if (scores[i] === scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

describe("aucMannWhitney", () => {
  it("perfect separation gives 1", () => {
    expect(aucMannWhitney([1, 1, 0, 0], [0.9, 0.8, 0.2, 0.1])).toBe(1);
  });

  it("all tied gives 0.5", () => {
    expect(aucMannWhitney([1, 0, 1, 0], [0.5, 0.5, 0.5, 0.5])).toBe(0.5);
  });

  it("matches the pair-counting oracle on random data with ties", () => {
    const rng = new SplitMix(5);
    for (let trial = 0; trial < 50; trial++) {
      const n = 10 + rng.nextBelow(30);
      const labels: number[] = [];
      const scores: number[] = [];
      for (let i = 0; i < n; i++) {
        labels.push(rng.nextBelow(2));
        scores.push(rng.nextBelow(8) / 8 + (trial % 2 ? 0 : uniform(rng) * 1e-3));
      }
      if (!labels.includes(0) || !labels.includes(1)) continue;
      const got = aucMannWhitney(labels, scores);
      expect(got).toBeCloseTo(aucPairCount(labels, scores), 12);
    }
  });

  it("throws on a single class", () => {
    expect(() => aucMannWhitney([1, 1], [0.3, 0.4])).toThrow();
  });
});

describe("computeMetrics", () => {
  it("hand fixture: confusion order tp,fn,fp,tn", () => {
    const m = computeMetrics([1, 1, 1, 0, 0], [0.9, 0.6, 0.1, 0.8, 0.2]);
    expect([m.tp, m.fn, m.fp, m.tn]).toEqual([2, 1, 1, 1]);
    expect(m.accuracy).toBeCloseTo(3 / 5, 12);
    expect(m.f1).toBeCloseTo((2 * 2) / (2 * 2 + 1 + 1), 12);
  });

  it("threshold 0.5 counts as focused", () => {
    const m = computeMetrics([1, 0], [0.5, 0.5]);
    expect(m.tp).toBe(1);
    expect(m.fp).toBe(1);
  });

  it("single-class test set yields null AUC", () => {
    const m = computeMetrics([1, 1], [0.9, 0.8]);
    expect(m.auc).toBeNull();
    expect(m.accuracy).toBe(1);
  });
});
