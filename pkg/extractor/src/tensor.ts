/**
 * Binary tensor file format shared with the retrieval engine.
 *
 * Layout, all little-endian regardless of host:
 *   magic  8 bytes  "SCNTNSR1"
 *   rank   u32
 *   dims   rank x u64
 *   data   prod(dims) x f32, row-major
 *
 * Writing refuses non-finite values; reading validates magic, rank, dims,
 * length and finiteness. Identical tensors serialize to identical bytes.
 */

import { readFileSync, writeFileSync } from 'node:fs'

export const TENSOR_MAGIC = 'SCNTNSR1'
export const MAX_RANK = 8

export interface Tensor {
  dims: number[]
  data: Float32Array
}

export function tensorByteLength(dims: number[]): number {
  const count = dims.reduce((a, b) => a * b, 1)
  return 8 + 4 + 8 * dims.length + 4 * count
}

export function writeTensor(tensor: Tensor): Buffer {
  const { dims, data } = tensor
  if (dims.length < 1 || dims.length > MAX_RANK) {
    throw new Error(`tensor rank must be in 1..${MAX_RANK}, got ${dims.length}`)
  }
  const count = dims.reduce((a, b) => a * b, 1)
  for (const d of dims) {
    if (!Number.isInteger(d) || d < 1) throw new Error(`bad dimension ${d}`)
  }
  if (count !== data.length) {
    throw new Error(`dims ${JSON.stringify(dims)} need ${count} values, got ${data.length}`)
  }
  const buf = Buffer.alloc(tensorByteLength(dims))
  buf.write(TENSOR_MAGIC, 0, 'ascii')
  buf.writeUInt32LE(dims.length, 8)
  dims.forEach((d, i) => buf.writeBigUInt64LE(BigInt(d), 12 + 8 * i))
  const base = 12 + 8 * dims.length
  for (let i = 0; i < data.length; i++) {
    const v = data[i]
    if (!Number.isFinite(v)) throw new Error(`non-finite value at flat index ${i}`)
    buf.writeFloatLE(v, base + 4 * i)
  }
  return buf
}

export function readTensor(buf: Buffer): Tensor {
  if (buf.length < 12) throw new Error(`truncated tensor payload (${buf.length} bytes)`)
  if (buf.toString('ascii', 0, 8) !== TENSOR_MAGIC) {
    throw new Error('bad tensor magic')
  }
  const rank = buf.readUInt32LE(8)
  if (rank < 1 || rank > MAX_RANK) throw new Error(`bad tensor rank ${rank}`)
  const dimsEnd = 12 + 8 * rank
  if (buf.length < dimsEnd) throw new Error('truncated tensor dims')
  const dims: number[] = []
  for (let i = 0; i < rank; i++) {
    const d = Number(buf.readBigUInt64LE(12 + 8 * i))
    if (d < 1) throw new Error(`bad dimension ${d}`)
    dims.push(d)
  }
  const count = dims.reduce((a, b) => a * b, 1)
  if (buf.length !== dimsEnd + 4 * count) {
    throw new Error(`expected ${dimsEnd + 4 * count} bytes, got ${buf.length}`)
  }
  const data = new Float32Array(count)
  for (let i = 0; i < count; i++) {
    const v = buf.readFloatLE(dimsEnd + 4 * i)
    if (!Number.isFinite(v)) throw new Error(`non-finite value at flat index ${i}`)
    data[i] = v
  }
  return { dims, data }
}

export function writeTensorFile(path: string, tensor: Tensor): void {
  writeFileSync(path, writeTensor(tensor))
}

export function readTensorFile(path: string): Tensor {
  return readTensor(readFileSync(path))
}
