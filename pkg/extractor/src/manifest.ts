/**
 * Assemble the dataset manifest the engine loads: per-video metadata file
 * paths plus the shared embedding table and exemplar corpus, all relative
 * to the manifest's directory.
 */

import { writeFileSync } from 'node:fs'
import { dirname, relative } from 'node:path'

export interface ManifestVideo {
  video_id: string
  transcript_file: string
  shots_file: string
  scenes_file: string
  keyframe_feature_dir: string
}

export interface ManifestInputs {
  videos: ManifestVideo[]
  embeddingFile: string
  corpusDir: string
}

export function writeManifest(path: string, inputs: ManifestInputs): void {
  const base = dirname(path)
  const rel = (p: string) => relative(base, p).split('\\').join('/')
  const manifest = {
    videos: inputs.videos
      .map(v => ({
        video_id: v.video_id,
        transcript_file: rel(v.transcript_file),
        shots_file: rel(v.shots_file),
        scenes_file: rel(v.scenes_file),
        keyframe_feature_dir: rel(v.keyframe_feature_dir),
      }))
      .sort((a, b) => (a.video_id < b.video_id ? -1 : 1)),
    embedding_file: rel(inputs.embeddingFile),
    corpus_dir: rel(inputs.corpusDir),
  }
  writeFileSync(path, JSON.stringify(manifest, null, 2) + '\n')
}
