import { readFileSync, writeFileSync } from 'node:fs'

export function readJsonl<T = Record<string, unknown>>(path: string): T[] {
  const rows: T[] = []
  const lines = readFileSync(path, 'utf-8').split('\n')
  lines.forEach((line, i) => {
    const trimmed = line.trim()
    if (!trimmed) return
    try {
      rows.push(JSON.parse(trimmed) as T)
    } catch (err) {
      throw new Error(`${path}:${i + 1}: bad JSON line: ${err}`)
    }
  })
  return rows
}

/** One object per line, keys sorted, so output bytes are deterministic. */
export function writeJsonl(path: string, rows: Array<Record<string, unknown>>): void {
  const text = rows.map(row => JSON.stringify(sortKeys(row))).join('\n')
  writeFileSync(path, rows.length ? text + '\n' : '')
}

export function sortKeys<T extends Record<string, unknown>>(obj: T): T {
  const out: Record<string, unknown> = {}
  for (const key of Object.keys(obj).sort()) out[key] = obj[key]
  return out as T
}
