/**
 * Word-embedding table export: either train a small skip-gram model with
 * negative sampling on a plain-text corpus, or import pretrained vectors in
 * word2vec text format. Both paths emit the same artifacts the engine
 * loads: `<name>.tnsr` ([vocab x dim] float32), `<name>.vocab.jsonl`
 * ({"term": ...} per line, row order) and `<name>.meta.json` flagging the
 * source. Training is seeded and single-threaded, hence byte-reproducible.
 */

import { readFileSync, writeFileSync } from 'node:fs'
import { join } from 'node:path'

import { writeJsonl } from './jsonl.js'
import { Rng } from './rng.js'
import { writeTensorFile } from './tensor.js'

export interface EmbeddingTable {
  terms: string[]
  dim: number
  /** row-major [terms.length x dim] */
  vectors: Float32Array
  source: 'trained-skipgram' | 'imported'
}

export interface SkipgramOptions {
  dim?: number
  window?: number
  negatives?: number
  epochs?: number
  learningRate?: number
  minCount?: number
  seed?: string
}

export function tokenizeCorpus(text: string): string[] {
  return text
    .toLowerCase()
    .split(/[^a-z']+/)
    .filter(w => w.length > 1)
}

export function trainSkipgram(text: string, options: SkipgramOptions = {}): EmbeddingTable {
  const dim = options.dim ?? 32
  const window = options.window ?? 3
  const negatives = options.negatives ?? 5
  const epochs = options.epochs ?? 5
  const lr = options.learningRate ?? 0.05
  const minCount = options.minCount ?? 2
  const rng = new Rng(`skipgram:${options.seed ?? '0'}`)

  const words = tokenizeCorpus(text)
  const counts = new Map<string, number>()
  for (const w of words) counts.set(w, (counts.get(w) ?? 0) + 1)
  const terms = [...counts.entries()]
    .filter(([, c]) => c >= minCount)
    .sort((a, b) => b[1] - a[1] || (a[0] < b[0] ? -1 : 1))
    .map(([t]) => t)
  if (terms.length === 0) throw new Error('empty vocabulary after frequency cutoff')
  const index = new Map(terms.map((t, i) => [t, i]))
  const corpus = words.map(w => index.get(w)).filter((i): i is number => i !== undefined)

  // Unigram^0.75 negative-sampling table.
  const tableSize = Math.max(10000, terms.length * 50)
  const weights = terms.map(t => (counts.get(t) ?? 0) ** 0.75)
  const totalWeight = weights.reduce((a, b) => a + b, 0)
  const negTable = new Int32Array(tableSize)
  {
    let i = 0
    let cumulative = weights[0] / totalWeight
    for (let k = 0; k < tableSize; k++) {
      negTable[k] = i
      if ((k + 1) / tableSize > cumulative && i < terms.length - 1) {
        i++
        cumulative += weights[i] / totalWeight
      }
    }
  }

  const main = new Float32Array(terms.length * dim)
  const context = new Float32Array(terms.length * dim)
  for (let i = 0; i < main.length; i++) main[i] = (rng.next() - 0.5) / dim

  const sigmoid = (x: number) => 1 / (1 + Math.exp(-x))
  const update = (center: number, target: number, label: number) => {
    const cBase = center * dim
    const tBase = target * dim
    let dot = 0
    for (let d = 0; d < dim; d++) dot += main[cBase + d] * context[tBase + d]
    const gradient = lr * (label - sigmoid(dot))
    for (let d = 0; d < dim; d++) {
      const c = main[cBase + d]
      main[cBase + d] += gradient * context[tBase + d]
      context[tBase + d] += gradient * c
    }
  }

  for (let epoch = 0; epoch < epochs; epoch++) {
    for (let pos = 0; pos < corpus.length; pos++) {
      const center = corpus[pos]
      const span = 1 + rng.int(window)
      for (let off = -span; off <= span; off++) {
        if (off === 0) continue
        const ctxPos = pos + off
        if (ctxPos < 0 || ctxPos >= corpus.length) continue
        update(center, corpus[ctxPos], 1)
        for (let n = 0; n < negatives; n++) {
          update(center, negTable[rng.int(tableSize)], 0)
        }
      }
    }
  }
  return { terms, dim, vectors: main, source: 'trained-skipgram' }
}

/** word2vec text format: optional "count dim" header, then "word v1 .. vd". */
export function importWord2vecText(text: string): EmbeddingTable {
  const lines = text.split('\n').filter(l => l.trim().length > 0)
  if (lines.length === 0) throw new Error('empty vectors file')
  let start = 0
  const first = lines[0].trim().split(/\s+/)
  if (first.length === 2 && first.every(t => /^\d+$/.test(t))) start = 1
  const terms: string[] = []
  const rows: number[][] = []
  let dim = -1
  for (let i = start; i < lines.length; i++) {
    const parts = lines[i].trim().split(/\s+/)
    if (parts.length < 2) continue
    const values = parts.slice(1).map(Number)
    if (values.some(v => !Number.isFinite(v))) {
      throw new Error(`non-finite vector for term ${parts[0]}`)
    }
    if (dim < 0) dim = values.length
    if (values.length !== dim) {
      throw new Error(`inconsistent dimension at line ${i + 1}: ${values.length} vs ${dim}`)
    }
    if (values.every(v => v === 0)) {
      console.warn(`skipping zero vector for term ${parts[0]}`)
      continue
    }
    terms.push(parts[0])
    rows.push(values)
  }
  if (terms.length === 0) throw new Error('empty vocabulary in vectors file')
  const vectors = new Float32Array(terms.length * dim)
  rows.forEach((row, i) => vectors.set(row, i * dim))
  return { terms, dim, vectors, source: 'imported' }
}

export function writeEmbeddingTable(outDir: string, name: string, table: EmbeddingTable): void {
  writeTensorFile(join(outDir, `${name}.tnsr`), {
    dims: [table.terms.length, table.dim],
    data: table.vectors,
  })
  writeJsonl(
    join(outDir, `${name}.vocab.jsonl`),
    table.terms.map(term => ({ term })),
  )
  writeFileSync(
    join(outDir, `${name}.meta.json`),
    JSON.stringify({ dim: table.dim, source: table.source, terms: table.terms.length }, null, 2) +
      '\n',
  )
}

export function trainAndExport(corpusFile: string, outDir: string, name: string,
                               options: SkipgramOptions = {}): EmbeddingTable {
  const table = trainSkipgram(readFileSync(corpusFile, 'utf-8'), options)
  writeEmbeddingTable(outDir, name, table)
  return table
}

export function importAndExport(vectorsFile: string, outDir: string, name: string): EmbeddingTable {
  const table = importWord2vecText(readFileSync(vectorsFile, 'utf-8'))
  writeEmbeddingTable(outDir, name, table)
  return table
}
