import { N_CHANNELS, N_FEATURES, Slice } from "../src/data";
import { SplitMix } from "../src/split";

/** Uniform float in [-1, 1) from the splitmix64 stream. */
export function uniform(rng: SplitMix): number {
  return (Number(rng.next() >> 11n) / 2 ** 53) * 2 - 1;
}

/**
 * Separable two-class rows: noise everywhere, plus a +shift on the gamma
 * block (the last 62 band-major columns) for class 1.
 */
export function separableRows(
  n: number,
  seed: number,
  shift = 3.0,
): { rows: Float64Array[]; labels: number[] } {
  const rng = new SplitMix(seed);
  const rows: Float64Array[] = [];
  const labels: number[] = [];
  for (let i = 0; i < n; i++) {
    const label = i % 2;
    const row = new Float64Array(N_FEATURES);
    for (let k = 0; k < N_FEATURES; k++) row[k] = uniform(rng);
    if (label === 1) {
      for (let c = 0; c < N_CHANNELS; c++) row[4 * N_CHANNELS + c] += shift;
    }
    rows.push(row);
    labels.push(label);
  }
  return { rows, labels };
}

/** A synthetic SubjectData with the same separable structure, per video. */
export function separableSubject(
  nVideos = 10,
  slicesPerVideo = 6,
  seed = 11,
  shift = 3.0,
): { subjectId: string; session: number; videos: Map<number, Slice[]> } {
  const videos = new Map<number, Slice[]>();
  const rng = new SplitMix(seed);
  for (let vid = 1; vid <= nVideos; vid++) {
    const slices: Slice[] = [];
    for (let i = 0; i < slicesPerVideo; i++) {
      const label = i % 3 !== 2 ? 1 : 0; // 2:1 imbalance like the harness tests
      const features = new Float64Array(N_FEATURES);
      for (let k = 0; k < N_FEATURES; k++) features[k] = uniform(rng);
      if (label === 1) {
        for (let c = 0; c < N_CHANNELS; c++) features[4 * N_CHANNELS + c] += shift;
      }
      slices.push({
        subjectId: "t01",
        session: 1,
        videoId: vid,
        sliceIndex: i,
        tStartMs: i * 1000,
        tEndMs: i * 1000 + 999,
        label,
        features,
      });
    }
    videos.set(vid, slices);
  }
  return { subjectId: "t01", session: 1, videos };
}
