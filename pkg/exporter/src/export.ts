/**
 * Export pipeline: manifest + plan -> embedding-store directory.
 */

import { Adapter } from './adapters';
import {
  Manifest,
  PlanFile,
  StoreRecord,
  writeEmbeddingSet,
} from './formats';

export interface ExportResult {
  records: number;
  skipped: string[];
  dataSha256: string;
}

export const exportEmbeddings = (
  manifest: Manifest,
  plan: PlanFile,
  adapter: Adapter,
  outDir: string,
  seed: number,
): ExportResult => {
  const planByVideo = new Map(plan.videos.map((v) => [v.video_id, v]));
  for (const video of manifest.videos) {
    if (!planByVideo.has(video.id)) {
      throw new Error(`no plan for manifest video ${video.id}`);
    }
  }
  const manifestIds = new Set(manifest.videos.map((v) => v.id));
  for (const id of planByVideo.keys()) {
    if (!manifestIds.has(id)) {
      throw new Error(`plan video ${id} is not in the manifest`);
    }
  }

  const tokens = manifest.level === 'patch' ? manifest.tokens ?? 1 : 1;
  const records: StoreRecord[] = [];
  const skipped: string[] = [];
  for (const video of manifest.videos) {
    const videoPlan = planByVideo.get(video.id)!;
    try {
      const clips = videoPlan.clips;
      const block = new Float32Array(clips.length * tokens * manifest.dim);
      clips.forEach((clip, c) => {
        const values = adapter({
          videoId: video.id,
          clipIndex: clip.clip_index,
          frames: clip.frames,
          tokens,
          dim: manifest.dim,
          seed,
        });
        block.set(values, c * tokens * manifest.dim);
      });
      records.push({
        id: video.id,
        label: video.label,
        clips: clips.length,
        tokens,
        block,
      });
    } catch (err) {
      skipped.push(`${video.id}: ${(err as Error).message}`);
    }
  }

  const { dataSha256 } = writeEmbeddingSet(
    outDir,
    {
      dataset: manifest.dataset,
      dim: manifest.dim,
      level: manifest.level,
      classes: manifest.classes,
    },
    records,
  );
  return { records: records.length, skipped, dataSha256 };
};
