/**
 * Adapter registry. An adapter turns one planned clip of one video into
 * per-token embedding scalars. Real model adapters wrap an inference stack;
 * the built-in `synthetic` adapter needs none, so export pipelines can be
 * exercised hermetically.
 */

export interface ClipRequest {
  videoId: string;
  clipIndex: number;
  frames: number[];
  tokens: number;
  dim: number;
  seed: number;
}

export type Adapter = (req: ClipRequest) => Float32Array;

const fnv1a32 = (text: string): number => {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
};

/** mulberry32: tiny deterministic PRNG, identical output on every platform */
const mulberry32 = (seed: number) => {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
};

/**
 * Deterministic pseudo-embeddings keyed by (seed, video, clip, frame list).
 * Reversing a clip's frame list changes its embedding, so forward and
 * reversed exports of the same video genuinely differ.
 */
export const syntheticAdapter: Adapter = (req) => {
  const key = `${req.seed}:${req.videoId}:${req.clipIndex}:${req.frames.join(',')}`;
  const next = mulberry32(fnv1a32(key));
  const out = new Float32Array(req.tokens * req.dim);
  for (let i = 0; i < out.length; i++) {
    out[i] = Math.fround(2 * next() - 1);
  }
  return out;
};

const registry: Record<string, Adapter> = {
  synthetic: syntheticAdapter,
};

export const getAdapter = (name: string): Adapter => {
  const adapter = registry[name];
  if (!adapter) {
    throw new Error(
      `unknown adapter "${name}"; available: ${Object.keys(registry).join(', ')}`,
    );
  }
  return adapter;
};

export const registerAdapter = (name: string, adapter: Adapter): void => {
  registry[name] = adapter;
};
