/**
 * Minimal binary PPM (P6) reader/writer. Frames and exemplar images reach
 * the extractor in this format: trivially parseable, no codec dependencies,
 * and byte-deterministic to regenerate in tests.
 */

import { readFileSync, writeFileSync } from 'node:fs'

export interface Image {
  width: number
  height: number
  /** RGB interleaved, length = width * height * 3, values 0..255 */
  pixels: Uint8Array
}

export function decodePpm(buf: Buffer): Image {
  let pos = 0
  const token = (): string => {
    // skip whitespace and '#' comments
    for (;;) {
      while (pos < buf.length && /\s/.test(String.fromCharCode(buf[pos]))) pos++
      if (pos < buf.length && buf[pos] === 0x23) {
        while (pos < buf.length && buf[pos] !== 0x0a) pos++
      } else {
        break
      }
    }
    const start = pos
    while (pos < buf.length && !/\s/.test(String.fromCharCode(buf[pos]))) pos++
    return buf.toString('ascii', start, pos)
  }
  if (token() !== 'P6') throw new Error('not a binary PPM (P6) file')
  const width = parseInt(token(), 10)
  const height = parseInt(token(), 10)
  const maxval = parseInt(token(), 10)
  if (!(width > 0 && height > 0)) throw new Error('bad PPM dimensions')
  if (maxval !== 255) throw new Error(`unsupported PPM maxval ${maxval}`)
  pos++ // single whitespace after maxval
  const need = width * height * 3
  if (buf.length - pos < need) throw new Error('truncated PPM pixel data')
  return { width, height, pixels: new Uint8Array(buf.subarray(pos, pos + need)) }
}

export function encodePpm(image: Image): Buffer {
  const header = Buffer.from(`P6\n${image.width} ${image.height}\n255\n`, 'ascii')
  return Buffer.concat([header, Buffer.from(image.pixels)])
}

export function readPpm(path: string): Image {
  return decodePpm(readFileSync(path))
}

export function writePpm(path: string, image: Image): void {
  writeFileSync(path, encodePpm(image))
}

/** Pixels as floats in [-0.5, 0.5], shape [height, width, 3] row-major. */
export function toFloats(image: Image): Float32Array {
  const out = new Float32Array(image.pixels.length)
  for (let i = 0; i < image.pixels.length; i++) {
    out[i] = image.pixels[i] / 255 - 0.5
  }
  return out
}
