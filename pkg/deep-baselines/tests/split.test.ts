import * as fs from "node:fs";
import * as path from "node:path";

import { describe, expect, it } from "vitest";

import { SplitMix, shuffled, splitVideos } from "../src/split";

interface FixtureSplit {
  seed: number;
  videos: number[];
  train: number[];
  test: number[];
}

const fixturePath = path.join(__dirname, "../../tests/fixtures/split_vectors.json");
const fixture: { splits: FixtureSplit[] } = JSON.parse(fs.readFileSync(fixturePath, "utf-8"));

describe("splitmix64 stream", () => {
  it("produces 64-bit values", () => {
    const rng = new SplitMix(0);
    for (let i = 0; i < 100; i++) {
      const z = rng.next();
      expect(z >= 0n && z < 1n << 64n).toBe(true);
    }
  });

  it("is deterministic under the seed", () => {
    const a = new SplitMix(42);
    const b = new SplitMix(42);
    for (let i = 0; i < 20; i++) expect(a.next()).toBe(b.next());
  });
});

describe("shuffled", () => {
  it("is a permutation", () => {
    const items = [1, 2, 3, 4, 5, 6, 7];
    const out = shuffled(items, 3);
    expect(out.slice().sort((a, b) => a - b)).toEqual(items);
  });
});

describe("splitVideos against the shared fixture", () => {
  it("matches every frozen split exactly", () => {
    expect(fixture.splits.length).toBeGreaterThan(20);
    for (const { seed, videos, train, test } of fixture.splits) {
      const plan = splitVideos(videos, seed);
      expect(plan.train, `seed ${seed}`).toEqual(train);
      expect(plan.test, `seed ${seed}`).toEqual(test);
    }
  });

  it("rejects fewer than two videos", () => {
    expect(() => splitVideos([1], 0)).toThrow();
  });

  it("never overlaps train and test", () => {
    for (let seed = 0; seed < 50; seed++) {
      const plan = splitVideos([1, 2, 3, 4, 5, 6, 7, 8, 9, 10], seed);
      const overlap = plan.train.filter((v) => plan.test.includes(v));
      expect(overlap).toEqual([]);
      expect(plan.train.length + plan.test.length).toBe(10);
      expect(plan.test.length).toBe(3);
    }
  });
});
