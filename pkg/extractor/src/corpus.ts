/**
 * Exemplar-corpus feature extraction: one subdirectory of PPM images per
 * category under the input directory becomes one
 * `<category>/exemplars.fc6.tnsr` ([n x 4096]) plus `<category>/synset.json`
 * listing the category's synonym words (from an optional words map, falling
 * back to the directory name). Categories with zero readable images are
 * excluded with a warning.
 */

import { existsSync, mkdirSync, readdirSync, readFileSync, statSync, writeFileSync } from 'node:fs'
import { join } from 'node:path'

import { readPpm, toFloats } from './ppm.js'
import { writeTensorFile } from './tensor.js'
import { fitToInput, forward, NetworkWeights, TF } from './vgg.js'

export interface CorpusReport {
  categories: string[]
  excluded: Array<{ category: string; reason: string }>
}

export interface ExtractCorpusOptions {
  tf: TF
  weights: NetworkWeights
  imagesDir: string
  outDir: string
  /** Optional JSON file: {"category": ["word", ...], ...} */
  synsetWordsFile?: string
}

export function extractCorpusFeatures(options: ExtractCorpusOptions): CorpusReport {
  const { tf, weights } = options
  const synsetWords: Record<string, string[]> = options.synsetWordsFile
    ? JSON.parse(readFileSync(options.synsetWordsFile, 'utf-8'))
    : {}

  const categories: string[] = []
  const excluded: Array<{ category: string; reason: string }> = []
  const subdirs = readdirSync(options.imagesDir)
    .filter(name => statSync(join(options.imagesDir, name)).isDirectory())
    .sort()
  for (const category of subdirs) {
    const dir = join(options.imagesDir, category)
    const images = readdirSync(dir).filter(f => f.endsWith('.ppm')).sort()
    const rows: Float32Array[] = []
    for (const file of images) {
      try {
        const image = readPpm(join(dir, file))
        const floats = fitToInput(
          tf,
          toFloats(image),
          image.width,
          image.height,
          weights.config.inputSide,
        )
        rows.push(forward(tf, weights, floats).fc6)
      } catch (err) {
        console.warn(`skipping unreadable ${category}/${file}: ${err}`)
      }
    }
    if (rows.length === 0) {
      excluded.push({ category, reason: 'no readable images' })
      console.warn(`excluding category ${category}: no readable images`)
      continue
    }
    const dim = rows[0].length
    const matrix = new Float32Array(rows.length * dim)
    rows.forEach((row, i) => matrix.set(row, i * dim))
    const outCat = join(options.outDir, category)
    mkdirSync(outCat, { recursive: true })
    writeTensorFile(join(outCat, 'exemplars.fc6.tnsr'), {
      dims: [rows.length, dim],
      data: matrix,
    })
    const words = synsetWords[category] ?? [category]
    writeFileSync(join(outCat, 'synset.json'), JSON.stringify({ words }) + '\n')
    categories.push(category)
  }
  if (!existsSync(options.outDir)) mkdirSync(options.outDir, { recursive: true })
  return { categories, excluded }
}
