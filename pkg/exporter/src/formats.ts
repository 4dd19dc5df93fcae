/**
 * On-disk embedding-store format shared with the evaluation engine:
 *
 *   meta.json   {dataset, dim, level, dtype: "f32le", classes}
 *   index.jsonl one {id, label?, clips, tokens, offset} per line; offset in
 *               scalars from buffer start, blocks row-major [clips][tokens][dim]
 *   data.bin    raw concatenated 32-bit little-endian IEEE-754 scalars
 */

import { createHash } from 'crypto';
import * as fs from 'fs';
import * as path from 'path';

export interface StoreMeta {
  dataset: string;
  dim: number;
  level: 'clip' | 'patch';
  dtype: 'f32le';
  classes: string[];
}

export interface IndexRecord {
  id: string;
  label?: number;
  clips: number;
  tokens: number;
  offset: number;
}

export interface StoreRecord {
  id: string;
  label?: number;
  clips: number;
  tokens: number;
  /** length = clips * tokens * dim */
  block: Float32Array;
}

export const encodeF32LE = (values: Float32Array): Buffer => {
  const buf = Buffer.alloc(values.length * 4);
  const view = new DataView(buf.buffer, buf.byteOffset, buf.byteLength);
  for (let i = 0; i < values.length; i++) {
    view.setFloat32(i * 4, values[i], true);
  }
  return buf;
};

export const decodeF32LE = (buf: Buffer): Float32Array => {
  const view = new DataView(buf.buffer, buf.byteOffset, buf.byteLength);
  const out = new Float32Array(buf.byteLength / 4);
  for (let i = 0; i < out.length; i++) {
    out[i] = view.getFloat32(i * 4, true);
  }
  return out;
};

export const writeEmbeddingSet = (
  dir: string,
  meta: Omit<StoreMeta, 'dtype'>,
  records: StoreRecord[],
): { dataSha256: string } => {
  fs.mkdirSync(dir, { recursive: true });

  const fullMeta: StoreMeta = { ...meta, dtype: 'f32le' };
  fs.writeFileSync(path.join(dir, 'meta.json'), JSON.stringify(fullMeta, null, 2) + '\n');

  const indexLines: string[] = [];
  const chunks: Buffer[] = [];
  let offset = 0;
  for (const rec of records) {
    const expected = rec.clips * rec.tokens * meta.dim;
    if (rec.block.length !== expected) {
      throw new Error(
        `record ${rec.id}: block has ${rec.block.length} scalars, expected ${expected}`,
      );
    }
    const row: IndexRecord = {
      id: rec.id,
      clips: rec.clips,
      tokens: rec.tokens,
      offset,
    };
    if (rec.label !== undefined) row.label = rec.label;
    indexLines.push(JSON.stringify(row));
    chunks.push(encodeF32LE(rec.block));
    offset += rec.clips * rec.tokens;
  }
  fs.writeFileSync(
    path.join(dir, 'index.jsonl'),
    indexLines.length ? indexLines.join('\n') + '\n' : '',
  );

  const data = Buffer.concat(chunks);
  fs.writeFileSync(path.join(dir, 'data.bin'), data);
  return { dataSha256: createHash('sha256').update(data).digest('hex') };
};

export const readEmbeddingSet = (
  dir: string,
): { meta: StoreMeta; records: IndexRecord[]; data: Float32Array } => {
  const meta = JSON.parse(
    fs.readFileSync(path.join(dir, 'meta.json'), 'utf-8'),
  ) as StoreMeta;
  const records = fs
    .readFileSync(path.join(dir, 'index.jsonl'), 'utf-8')
    .split('\n')
    .filter((line) => line.trim().length > 0)
    .map((line) => JSON.parse(line) as IndexRecord);
  const data = decodeF32LE(fs.readFileSync(path.join(dir, 'data.bin')));
  return { meta, records, data };
};

// --- extraction plans (produced by the engine's planner) -------------------

export interface ClipPlan {
  clip_index: number;
  start_sec: number;
  frames: number[];
}

export interface VideoPlan {
  video_id: string;
  clips: ClipPlan[];
  views?: { view_id: number[]; spatial_offset: number; clip: ClipPlan }[];
}

export interface PlanFile {
  videos: VideoPlan[];
}

export const readPlanFile = (file: string): PlanFile =>
  JSON.parse(fs.readFileSync(file, 'utf-8')) as PlanFile;

export const writePlanFile = (file: string, plan: PlanFile): void => {
  fs.writeFileSync(file, JSON.stringify(plan, null, 2) + '\n');
};

// --- input manifests --------------------------------------------------------

export interface ManifestVideo {
  id: string;
  fps: number;
  duration_sec: number;
  label?: number;
  path?: string;
}

export interface Manifest {
  dataset: string;
  dim: number;
  level: 'clip' | 'patch';
  tokens?: number;
  classes: string[];
  videos: ManifestVideo[];
}

export const readManifest = (file: string): Manifest => {
  const doc = JSON.parse(fs.readFileSync(file, 'utf-8')) as Manifest;
  const seen = new Set<string>();
  for (const video of doc.videos) {
    if (seen.has(video.id)) {
      throw new Error(`manifest id ${video.id} appears more than once`);
    }
    seen.add(video.id);
  }
  return doc;
};
