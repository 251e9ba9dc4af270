/**
 * Per-shot keyframe feature extraction.
 *
 * Shot boundaries are consumed as input (JSON lines with shot_id, video_id,
 * t_start, t_end). Decoded video frames arrive as PPM files named
 * `frame_<milliseconds>.ppm` in one directory per video; for every shot the
 * frame nearest the shot's middle time (within the shot) is the keyframe.
 * Shots without a readable keyframe are flagged and omitted, and the
 * emitted shots/scenes files are renumbered so the output dataset still
 * validates (contiguous shot ids, scene spans partitioning them).
 *
 * Per keyframe the network produces `<shot_id>.fc6.tnsr` (4096) and five
 * `<shot_id>.block<b>.tnsr` mean activation maps at native resolutions.
 */

import { mkdirSync, readdirSync } from 'node:fs'
import { join } from 'node:path'

import { readJsonl, writeJsonl } from './jsonl.js'
import { readPpm, toFloats } from './ppm.js'
import { writeTensorFile } from './tensor.js'
import { fitToInput, forward, NetworkWeights, TF } from './vgg.js'

export interface ShotRow {
  shot_id: number
  video_id: string
  t_start: number
  t_end: number
}

export interface SceneRow {
  scene_id: number
  video_id: string
  shot_span: [number, number]
}

export interface FrameFile {
  /** seconds */
  time: number
  path: string
}

export function listFrames(framesDir: string): FrameFile[] {
  const out: FrameFile[] = []
  for (const name of readdirSync(framesDir).sort()) {
    const m = /^frame_(\d+)\.ppm$/.exec(name)
    if (m) out.push({ time: parseInt(m[1], 10) / 1000, path: join(framesDir, name) })
  }
  return out.sort((a, b) => a.time - b.time)
}

export function middleFrame(shot: ShotRow, frames: FrameFile[]): FrameFile | null {
  const mid = (shot.t_start + shot.t_end) / 2
  let best: FrameFile | null = null
  let bestDist = Infinity
  for (const frame of frames) {
    if (frame.time < shot.t_start || frame.time >= shot.t_end) continue
    const dist = Math.abs(frame.time - mid)
    if (dist < bestDist) {
      best = frame
      bestDist = dist
    }
  }
  return best
}

export interface RenumberResult {
  shots: ShotRow[]
  scenes: SceneRow[]
  /** old shot id -> new shot id */
  shotIdMap: Map<number, number>
  droppedScenes: number[]
}

/**
 * Drop flagged shots and renumber ids so invariants hold downstream. When
 * nothing is dropped, ids pass through unchanged.
 */
export function renumberAfterDrops(
  shots: ShotRow[],
  scenes: SceneRow[],
  keep: Set<number>,
): RenumberResult {
  const ordered = [...shots].sort((a, b) => a.shot_id - b.shot_id)
  const survivors = ordered.filter(s => keep.has(s.shot_id))
  if (survivors.length === ordered.length) {
    return {
      shots: ordered,
      scenes: [...scenes].sort((a, b) => a.scene_id - b.scene_id),
      shotIdMap: new Map(ordered.map(s => [s.shot_id, s.shot_id])),
      droppedScenes: [],
    }
  }
  const base = ordered.length ? ordered[0].shot_id : 0
  const shotIdMap = new Map<number, number>()
  survivors.forEach((s, i) => shotIdMap.set(s.shot_id, base + i))
  const newShots = survivors.map(s => ({ ...s, shot_id: shotIdMap.get(s.shot_id)! }))

  const newScenes: SceneRow[] = []
  const droppedScenes: number[] = []
  for (const scene of [...scenes].sort((a, b) => a.scene_id - b.scene_id)) {
    const members = survivors
      .filter(s => s.shot_id >= scene.shot_span[0] && s.shot_id <= scene.shot_span[1])
      .map(s => shotIdMap.get(s.shot_id)!)
    if (members.length === 0) {
      droppedScenes.push(scene.scene_id)
      continue
    }
    newScenes.push({
      ...scene,
      shot_span: [Math.min(...members), Math.max(...members)],
    })
  }
  return { shots: newShots, scenes: newScenes, shotIdMap, droppedScenes }
}

export interface ExtractionReport {
  written: number[]
  flagged: Array<{ shot_id: number; reason: string }>
  droppedScenes: number[]
}

export interface ExtractKeyframesOptions {
  tf: TF
  weights: NetworkWeights
  shotsFile: string
  scenesFile: string
  framesDir: string
  outDir: string
}

/**
 * Extract features for every shot with a readable middle frame; write the
 * (possibly renumbered) shots/scenes files plus per-keyframe tensors under
 * outDir: shots.jsonl, scenes.jsonl, keyframes/<id>.{fc6,block1..5}.tnsr.
 */
export function extractKeyframeFeatures(options: ExtractKeyframesOptions): ExtractionReport {
  const { tf, weights } = options
  const shots = readJsonl<ShotRow>(options.shotsFile)
  const scenes = readJsonl<SceneRow>(options.scenesFile)
  const frames = listFrames(options.framesDir)

  // Decode keyframes up front: a shot survives only if its middle frame
  // exists AND parses, so the renumbered metadata matches the features.
  const keyframeImage = new Map<number, ReturnType<typeof readPpm>>()
  const flagged: Array<{ shot_id: number; reason: string }> = []
  for (const shot of [...shots].sort((a, b) => a.shot_id - b.shot_id)) {
    const frame = middleFrame(shot, frames)
    if (frame === null) {
      flagged.push({ shot_id: shot.shot_id, reason: 'no frame inside shot' })
      continue
    }
    try {
      keyframeImage.set(shot.shot_id, readPpm(frame.path))
    } catch (err) {
      flagged.push({ shot_id: shot.shot_id, reason: `unreadable frame: ${err}` })
    }
  }

  const keep = new Set(keyframeImage.keys())
  const renumbered = renumberAfterDrops(shots, scenes, keep)
  const oldIdOf = new Map([...renumbered.shotIdMap.entries()].map(([o, n]) => [n, o]))

  mkdirSync(join(options.outDir, 'keyframes'), { recursive: true })
  const written: number[] = []
  for (const shot of renumbered.shots) {
    const image = keyframeImage.get(oldIdOf.get(shot.shot_id)!)!
    const floats = fitToInput(
      tf,
      toFloats(image),
      image.width,
      image.height,
      weights.config.inputSide,
    )
    const result = forward(tf, weights, floats)
    const dir = join(options.outDir, 'keyframes')
    writeTensorFile(join(dir, `${shot.shot_id}.fc6.tnsr`), {
      dims: [result.fc6.length],
      data: result.fc6,
    })
    result.blockMaps.forEach((map, i) => {
      writeTensorFile(join(dir, `${shot.shot_id}.block${i + 1}.tnsr`), map)
    })
    written.push(shot.shot_id)
  }

  writeJsonl(join(options.outDir, 'shots.jsonl'), renumbered.shots as never)
  writeJsonl(join(options.outDir, 'scenes.jsonl'), renumbered.scenes as never)
  for (const flag of flagged) {
    console.warn(`flagged shot ${flag.shot_id}: ${flag.reason}`)
  }
  return { written, flagged, droppedScenes: renumbered.droppedScenes }
}
