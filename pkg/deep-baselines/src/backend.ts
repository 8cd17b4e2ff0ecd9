/**
 * Backend selection: prefer the WASM backend (vectorized kernels; roughly an
 * order of magnitude faster than the plain-JS CPU backend for conv/matmul
 * training) and fall back to "cpu" if it is unavailable.
 */

import * as tf from "@tensorflow/tfjs";

let ready: Promise<string> | null = null;

export function ensureBackend(): Promise<string> {
  if (!ready) {
    ready = (async () => {
      try {
        // eslint-disable-next-line @typescript-eslint/no-var-requires
        require("@tensorflow/tfjs-backend-wasm");
        if (await tf.setBackend("wasm")) {
          await tf.ready();
          return tf.getBackend();
        }
      } catch {
        // fall through to the default backend
      }
      await tf.setBackend("cpu");
      await tf.ready();
      return tf.getBackend();
    })();
  }
  return ready;
}
