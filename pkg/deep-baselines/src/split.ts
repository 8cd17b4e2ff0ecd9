/**
 * Deterministic, language-portable video splits.
 *
 * The shuffle is a Fisher-Yates pass driven by a splitmix64 stream so that
 * any consumer of the interchange CSV reproduces the exact same partitions
 * from the seed alone. Frozen vectors for this contract live in
 * tests/fixtures/split_vectors.json at the repository root.
 */

const MASK64 = (1n << 64n) - 1n;

export interface SplitPlan {
  train: number[];
  test: number[];
  seed: number;
}

/** One splitmix64 step: returns [nextState, output]. */
export function splitmix64(state: bigint): [bigint, bigint] {
  state = (state + 0x9e3779b97f4b1c15n) & MASK64;
  let z = state;
  z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
  z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
  z = z ^ (z >> 31n);
  return [state, z];
}

/** Stateful wrapper around the splitmix64 stream. */
export class SplitMix {
  private state: bigint;

  constructor(seed: number | bigint) {
    this.state = BigInt(seed) & MASK64;
  }

  next(): bigint {
    const [state, z] = splitmix64(this.state);
    this.state = state;
    return z;
  }

  /** Uniform integer in [0, bound). */
  nextBelow(bound: number): number {
    return Number(this.next() % BigInt(bound));
  }
}

/** Fisher-Yates shuffle with a splitmix64 stream seeded by `seed`. */
export function shuffled<T>(items: readonly T[], seed: number | bigint): T[] {
  const out = items.slice();
  const rng = new SplitMix(seed);
  for (let i = out.length - 1; i > 0; i--) {
    const j = rng.nextBelow(i + 1);
    [out[i], out[j]] = [out[j], out[i]];
  }
  return out;
}

/** Shuffle sorted video ids and split 7:3 (test = first max(1, 3n/10) ids). */
export function splitVideos(videoIds: readonly number[], seed: number): SplitPlan {
  const ids = Array.from(new Set(videoIds)).sort((a, b) => a - b);
  if (ids.length < 2) {
    throw new Error(`need at least 2 videos, got ${ids.length}`);
  }
  const order = shuffled(ids, seed);
  const nTest = Math.max(1, Math.floor((ids.length * 3) / 10));
  const test = order.slice(0, nTest).sort((a, b) => a - b);
  const train = order.slice(nTest).sort((a, b) => a - b);
  return { train, test, seed };
}
