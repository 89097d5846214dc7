/**
 * Deterministic sample footage for tests and demos: a low-resolution
 * grayscale clip that alternates between a synthetic "podium face" scene,
 * a wide shot (a different composition, read as a journalist question),
 * and flat color (nobody on camera). One frame per second keeps files
 * small while letting 2-second sampling land on exact frames.
 */

import type { DecodedVideo, Frame } from './types.js'
import { mulberry32 } from './backends.js'

const WIDTH = 64
const HEIGHT = 48

function renderChair(wobble: number): Uint8Array {
  const luma = new Uint8Array(WIDTH * HEIGHT)
  const cx = WIDTH / 2
  const cy = HEIGHT * 0.45
  const rx = WIDTH * 0.22
  const ry = HEIGHT * 0.33
  for (let y = 0; y < HEIGHT; y++) {
    for (let x = 0; x < WIDTH; x++) {
      const d = ((x - cx) / rx) ** 2 + ((y - cy) / ry) ** 2
      let v: number
      if (d < 1) {
        v = 195 - 45 * d + wobble * Math.sin(0.4 * x + 0.3 * y)
      } else {
        v = 58 + 9 * ((x + 2 * y) % 3)
      }
      luma[y * WIDTH + x] = Math.max(0, Math.min(255, Math.round(v)))
    }
  }
  return luma
}

function renderWideShot(wobble: number): Uint8Array {
  const luma = new Uint8Array(WIDTH * HEIGHT)
  for (let y = 0; y < HEIGHT; y++) {
    for (let x = 0; x < WIDTH; x++) {
      // bright aisles at the sides, dark seating in the middle: the
      // opposite composition of the podium close-up
      let v = 62 + 6 * (y % 4)
      if (x < 10 || x >= WIDTH - 10) v = 152 + ((x + y) % 9)
      const d1 = ((x - 14) / 4.5) ** 2 + ((y - 40) / 4.5) ** 2
      const d2 = ((x - 50) / 4.5) ** 2 + ((y - 41) / 4.5) ** 2
      if (d1 < 1 || d2 < 1) v = 175 + wobble
      luma[y * WIDTH + x] = Math.max(0, Math.min(255, Math.round(v)))
    }
  }
  return luma
}

function renderEmpty(): Uint8Array {
  return new Uint8Array(WIDTH * HEIGHT).fill(128)
}

export type Scene = 'chair' | 'wide' | 'empty'

/** Second-by-second scene schedule: mostly the chair, one Q&A cutaway
 * long enough to dominate its transcript segment, and a short gap with
 * nobody in frame near the end. */
export function sceneAt(sec: number, totalSeconds: number): Scene {
  const qaStart = Math.floor(totalSeconds / 2)
  const qaEnd = qaStart + Math.max(4, Math.floor(totalSeconds / 6))
  const gapStart = totalSeconds - Math.max(4, Math.floor(totalSeconds / 15))
  const gapEnd = gapStart + 2
  if (sec >= qaStart && sec < qaEnd) return 'wide'
  if (sec >= gapStart && sec < gapEnd) return 'empty'
  return 'chair'
}

export function makeSampleClip(seconds = 60, seed = 7): {
  video: DecodedVideo
  reference: Frame
} {
  if (!(seconds > 0)) throw new Error('sample clip needs a positive duration')
  const rng = mulberry32(seed)
  const frames: Uint8Array[] = []
  for (let sec = 0; sec < seconds; sec++) {
    const wobble = 6 * (rng() - 0.5)
    switch (sceneAt(sec, seconds)) {
      case 'chair':
        frames.push(renderChair(wobble))
        break
      case 'wide':
        frames.push(renderWideShot(wobble))
        break
      case 'empty':
        frames.push(renderEmpty())
        break
    }
  }
  return {
    video: { width: WIDTH, height: HEIGHT, fpsNum: 1, fpsDen: 1, frames },
    reference: { luma: renderChair(0), width: WIDTH, height: HEIGHT },
  }
}
