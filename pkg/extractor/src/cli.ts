/**
 * Extraction pipeline entry point.
 *
 *   keyframes         per-shot fc6 + block mean maps from decoded frames
 *   corpus            per-category exemplar features + synset metadata
 *   embeddings-train  skip-gram embedding table from a text corpus
 *   embeddings-import embedding table from word2vec text vectors
 *   transcript        timed transcript -> noun/proper-noun/foreign tokens
 *   manifest          assemble the dataset manifest from a job file
 *
 * Every command is deterministic given its inputs (and --seed where weights
 * are generated); rerunning writes byte-identical artifacts.
 */

import { mkdirSync, readFileSync, writeFileSync } from 'node:fs'
import { join } from 'node:path'
import { parseArgs } from 'node:util'

import { extractCorpusFeatures } from './corpus.js'
import { importAndExport, trainAndExport } from './embeddings.js'
import { extractKeyframeFeatures } from './frames.js'
import { writeJsonl } from './jsonl.js'
import { ManifestInputs, writeManifest } from './manifest.js'
import { parseTranscript, tokensFromLines } from './transcript.js'
import { DEFAULT_CONFIG, loadBackend, resolveWeights, seededWeights } from './vgg.js'

function usage(): never {
  console.error(
    'usage: extractor <keyframes|corpus|embeddings-train|embeddings-import|transcript|manifest> [options]',
  )
  process.exit(2)
}

function networkWeights(values: { weights?: string; seed?: string; widths?: string }) {
  if (values.weights) return resolveWeights({ weightsDir: values.weights })
  if (values.widths) {
    const widths = values.widths.split(',').map(Number)
    if (widths.length !== 5 || widths.some(w => !Number.isInteger(w) || w < 1)) {
      throw new Error(`--widths needs 5 positive integers, got ${values.widths}`)
    }
    return seededWeights(values.seed ?? '0', { ...DEFAULT_CONFIG, widths })
  }
  return seededWeights(values.seed ?? '0')
}

async function cmdKeyframes(argv: string[]): Promise<number> {
  const { values } = parseArgs({
    args: argv,
    options: {
      shots: { type: 'string' },
      scenes: { type: 'string' },
      frames: { type: 'string' },
      out: { type: 'string' },
      seed: { type: 'string' },
      weights: { type: 'string' },
      widths: { type: 'string' },
    },
  })
  if (!values.shots || !values.scenes || !values.frames || !values.out) usage()
  const tf = await loadBackend()
  mkdirSync(values.out, { recursive: true })
  const report = extractKeyframeFeatures({
    tf,
    weights: networkWeights(values),
    shotsFile: values.shots,
    scenesFile: values.scenes,
    framesDir: values.frames,
    outDir: values.out,
  })
  console.log(
    JSON.stringify({
      written: report.written.length,
      flagged: report.flagged.length,
      dropped_scenes: report.droppedScenes.length,
    }),
  )
  return 0
}

async function cmdCorpus(argv: string[]): Promise<number> {
  const { values } = parseArgs({
    args: argv,
    options: {
      images: { type: 'string' },
      out: { type: 'string' },
      'synset-words': { type: 'string' },
      seed: { type: 'string' },
      weights: { type: 'string' },
      widths: { type: 'string' },
    },
  })
  if (!values.images || !values.out) usage()
  const tf = await loadBackend()
  mkdirSync(values.out, { recursive: true })
  const report = extractCorpusFeatures({
    tf,
    weights: networkWeights(values),
    imagesDir: values.images,
    outDir: values.out,
    synsetWordsFile: values['synset-words'],
  })
  console.log(
    JSON.stringify({ categories: report.categories.length, excluded: report.excluded.length }),
  )
  return 0
}

async function cmdEmbeddingsTrain(argv: string[]): Promise<number> {
  const { values } = parseArgs({
    args: argv,
    options: {
      text: { type: 'string' },
      out: { type: 'string' },
      name: { type: 'string', default: 'embeddings' },
      dim: { type: 'string', default: '32' },
      epochs: { type: 'string', default: '5' },
      'min-count': { type: 'string', default: '2' },
      seed: { type: 'string', default: '0' },
    },
  })
  if (!values.text || !values.out) usage()
  mkdirSync(values.out, { recursive: true })
  const table = trainAndExport(values.text, values.out, values.name!, {
    dim: parseInt(values.dim!, 10),
    epochs: parseInt(values.epochs!, 10),
    minCount: parseInt(values['min-count']!, 10),
    seed: values.seed,
  })
  console.log(JSON.stringify({ terms: table.terms.length, dim: table.dim, source: table.source }))
  return 0
}

async function cmdEmbeddingsImport(argv: string[]): Promise<number> {
  const { values } = parseArgs({
    args: argv,
    options: {
      vectors: { type: 'string' },
      out: { type: 'string' },
      name: { type: 'string', default: 'embeddings' },
    },
  })
  if (!values.vectors || !values.out) usage()
  mkdirSync(values.out, { recursive: true })
  const table = importAndExport(values.vectors, values.out, values.name!)
  console.log(JSON.stringify({ terms: table.terms.length, dim: table.dim, source: table.source }))
  return 0
}

async function cmdTranscript(argv: string[]): Promise<number> {
  const { values } = parseArgs({
    args: argv,
    options: {
      in: { type: 'string' },
      out: { type: 'string' },
      'video-id': { type: 'string' },
      'foreign-words': { type: 'string' },
    },
  })
  if (!values.in || !values.out || !values['video-id']) usage()
  const foreignWords = values['foreign-words']
    ? new Set(
        readFileSync(values['foreign-words'], 'utf-8')
          .split('\n')
          .map(w => w.trim().toLowerCase())
          .filter(Boolean),
      )
    : undefined
  const lines = parseTranscript(readFileSync(values.in, 'utf-8'))
  const tokens = tokensFromLines(values['video-id'], lines, { foreignWords })
  writeJsonl(values.out, tokens as never)
  console.log(JSON.stringify({ lines: lines.length, tokens: tokens.length }))
  return 0
}

async function cmdManifest(argv: string[]): Promise<number> {
  const { values } = parseArgs({
    args: argv,
    options: { job: { type: 'string' }, out: { type: 'string' } },
  })
  if (!values.job || !values.out) usage()
  const job = JSON.parse(readFileSync(values.job, 'utf-8')) as ManifestInputs
  writeManifest(values.out, job)
  console.log(JSON.stringify({ manifest: values.out, videos: job.videos.length }))
  return 0
}

const COMMANDS: Record<string, (argv: string[]) => Promise<number>> = {
  keyframes: cmdKeyframes,
  corpus: cmdCorpus,
  'embeddings-train': cmdEmbeddingsTrain,
  'embeddings-import': cmdEmbeddingsImport,
  transcript: cmdTranscript,
  manifest: cmdManifest,
}

export async function main(argv: string[]): Promise<number> {
  const [command, ...rest] = argv
  const handler = command ? COMMANDS[command] : undefined
  if (!handler) usage()
  try {
    return await handler(rest)
  } catch (err) {
    console.error(String(err))
    return 1
  }
}

const isDirectRun = process.argv[1] && import.meta.url.endsWith(
  process.argv[1].split('/').pop() ?? '',
)
if (isDirectRun) {
  main(process.argv.slice(2)).then(code => {
    process.exitCode = code
  })
}
