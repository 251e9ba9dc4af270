/**
 * 16-layer CNN topology (13 conv layers in five blocks, then a 4096-unit
 * fully connected layer) used for keyframe and exemplar features.
 *
 * Block structure at a 224x224 input: (2, 2, 3, 3, 3) conv layers per
 * block, 3x3 kernels, ReLU, 2x2 max pooling between blocks, so block
 * activations sit at 224/112/56/28/14 and the last pool leaves 7x7. Per
 * block, the channel-and-layer mean activation map at native resolution is
 * exported; after the last pool the fully connected layer yields the
 * 4096-dim feature vector.
 *
 * Channel widths are configurable. Production-size weights can be loaded
 * from a directory of tensor files; otherwise a deterministic seeded
 * stand-in network (thin widths, He-scaled weights) is generated, which
 * preserves every architectural shape while staying fast on CPU.
 */

import { existsSync, mkdirSync, readFileSync, writeFileSync } from 'node:fs'
import { join } from 'node:path'

import type * as tfTypes from '@tensorflow/tfjs'

import { Rng } from './rng.js'
import { readTensorFile, writeTensorFile } from './tensor.js'

export type TF = typeof tfTypes

export const BLOCK_LAYERS = [2, 2, 3, 3, 3]
export const BLOCK_COUNT = BLOCK_LAYERS.length

export interface NetworkConfig {
  inputSide: number
  widths: number[] // output channels per block
  fc6Units: number
}

export const DEFAULT_CONFIG: NetworkConfig = {
  inputSide: 224,
  widths: [4, 8, 8, 8, 8],
  fc6Units: 4096,
}

export interface NetworkWeights {
  config: NetworkConfig
  convKernels: Float32Array[] // [3, 3, in, out] row-major
  convBiases: Float32Array[]
  fc6Kernel: Float32Array // [pooledSize, fc6Units] row-major
  fc6Bias: Float32Array
}

export function convShapes(config: NetworkConfig): Array<[number, number, number, number]> {
  const shapes: Array<[number, number, number, number]> = []
  let inCh = 3
  for (let b = 0; b < BLOCK_COUNT; b++) {
    for (let l = 0; l < BLOCK_LAYERS[b]; l++) {
      shapes.push([3, 3, inCh, config.widths[b]])
      inCh = config.widths[b]
    }
  }
  return shapes
}

export function pooledSize(config: NetworkConfig): number {
  const side = config.inputSide / 2 ** BLOCK_COUNT
  if (!Number.isInteger(side)) {
    throw new Error(`input side ${config.inputSide} is not divisible by ${2 ** BLOCK_COUNT}`)
  }
  return side * side * config.widths[BLOCK_COUNT - 1]
}

export function seededWeights(seed: string, config: NetworkConfig = DEFAULT_CONFIG): NetworkWeights {
  const rng = new Rng(`network-weights:${seed}`)
  const convKernels: Float32Array[] = []
  const convBiases: Float32Array[] = []
  for (const [kh, kw, cin, cout] of convShapes(config)) {
    const scale = Math.sqrt(2 / (kh * kw * cin)) // He init keeps ReLU activations O(1)
    convKernels.push(rng.normals(kh * kw * cin * cout, scale))
    convBiases.push(new Float32Array(cout))
  }
  const fanIn = pooledSize(config)
  return {
    config,
    convKernels,
    convBiases,
    fc6Kernel: rng.normals(fanIn * config.fc6Units, Math.sqrt(2 / fanIn)),
    fc6Bias: new Float32Array(config.fc6Units),
  }
}

export function saveWeights(dir: string, weights: NetworkWeights): void {
  mkdirSync(dir, { recursive: true })
  writeFileSync(join(dir, 'config.json'), JSON.stringify(weights.config, null, 2) + '\n')
  const shapes = convShapes(weights.config)
  shapes.forEach((shape, i) => {
    writeTensorFile(join(dir, `conv${i}.w.tnsr`), { dims: [...shape], data: weights.convKernels[i] })
    writeTensorFile(join(dir, `conv${i}.b.tnsr`), { dims: [shape[3]], data: weights.convBiases[i] })
  })
  writeTensorFile(join(dir, 'fc6.w.tnsr'), {
    dims: [pooledSize(weights.config), weights.config.fc6Units],
    data: weights.fc6Kernel,
  })
  writeTensorFile(join(dir, 'fc6.b.tnsr'), {
    dims: [weights.config.fc6Units],
    data: weights.fc6Bias,
  })
}

export function loadWeights(dir: string): NetworkWeights {
  const config = JSON.parse(readFileSync(join(dir, 'config.json'), 'utf-8')) as NetworkConfig
  const shapes = convShapes(config)
  const convKernels: Float32Array[] = []
  const convBiases: Float32Array[] = []
  shapes.forEach((shape, i) => {
    const k = readTensorFile(join(dir, `conv${i}.w.tnsr`))
    if (k.dims.join('x') !== shape.join('x')) {
      throw new Error(`conv${i} kernel dims ${k.dims} do not match architecture ${shape}`)
    }
    convKernels.push(k.data)
    convBiases.push(readTensorFile(join(dir, `conv${i}.b.tnsr`)).data)
  })
  return {
    config,
    convKernels,
    convBiases,
    fc6Kernel: readTensorFile(join(dir, 'fc6.w.tnsr')).data,
    fc6Bias: readTensorFile(join(dir, 'fc6.b.tnsr')).data,
  }
}

export function resolveWeights(opts: { weightsDir?: string; seed?: string }): NetworkWeights {
  if (opts.weightsDir && existsSync(opts.weightsDir)) return loadWeights(opts.weightsDir)
  if (opts.weightsDir) throw new Error(`weights directory ${opts.weightsDir} does not exist`)
  return seededWeights(opts.seed ?? '0')
}

let backend: TF | null = null

export async function loadBackend(): Promise<TF> {
  if (backend) return backend
  const tf = await import('@tensorflow/tfjs')
  await tf.setBackend('cpu')
  await tf.ready()
  backend = tf
  return tf
}

export interface ForwardResult {
  /** Five channel-and-layer mean maps at native block resolutions. */
  blockMaps: Array<{ dims: number[]; data: Float32Array }>
  fc6: Float32Array
}

/** Run one image (side*side*3 floats, row-major HWC) through the network. */
export function forward(tf: TF, weights: NetworkWeights, image: Float32Array): ForwardResult {
  const { config } = weights
  const side = config.inputSide
  if (image.length !== side * side * 3) {
    throw new Error(`expected ${side * side * 3} input floats, got ${image.length}`)
  }
  const blockMaps: Array<{ dims: number[]; data: Float32Array }> = []
  let fc6: Float32Array = new Float32Array(0)
  tf.tidy(() => {
    let x: tfTypes.Tensor4D = tf.tensor4d(image, [1, side, side, 3])
    const shapes = convShapes(config)
    let layer = 0
    for (let b = 0; b < BLOCK_COUNT; b++) {
      const outputs: tfTypes.Tensor4D[] = []
      for (let l = 0; l < BLOCK_LAYERS[b]; l++) {
        const kernel = tf.tensor4d(weights.convKernels[layer], shapes[layer])
        const bias = tf.tensor1d(weights.convBiases[layer])
        x = tf.relu(tf.add(tf.conv2d(x, kernel, 1, 'same'), bias) as tfTypes.Tensor4D)
        outputs.push(x)
        layer++
      }
      const stacked = tf.concat(outputs, 3)
      const mean = tf.mean(stacked, 3).squeeze([0]) as tfTypes.Tensor2D
      const [h, w] = mean.shape
      blockMaps.push({ dims: [h, w], data: mean.dataSync() as Float32Array })
      x = tf.maxPool(x, 2, 2, 'valid')
    }
    const flat = tf.reshape(x, [1, pooledSize(config)])
    const fcKernel = tf.tensor2d(weights.fc6Kernel, [pooledSize(config), config.fc6Units])
    const fcBias = tf.tensor1d(weights.fc6Bias)
    const out = tf.relu(tf.add(tf.matMul(flat, fcKernel), fcBias))
    fc6 = out.dataSync() as Float32Array
  })
  return { blockMaps, fc6 }
}

/** Bilinear-resize an RGB float image to the network's input side. */
export function fitToInput(
  tf: TF,
  image: Float32Array,
  width: number,
  height: number,
  side: number,
): Float32Array {
  if (width === side && height === side) return image
  return tf.tidy(() => {
    const x = tf.tensor3d(image, [height, width, 3])
    const resized = tf.image.resizeBilinear(x, [side, side], true)
    return resized.dataSync() as Float32Array
  })
}
