/**
 * Default deterministic backends. Real FER/ASR/embedding models are
 * model-dependent and swappable; these built-ins derive every output from
 * pixel statistics alone, so a given clip always produces byte-identical
 * files. They implement the same interfaces a learned model would sit
 * behind.
 */

import type {
  AsrBackend,
  DecodedVideo,
  EmotionScores,
  EmbeddingBackend,
  FerBackend,
  Frame,
  RawSegment,
} from './types.js'
import { EMOTIONS } from './types.js'
import { durationSeconds, frameAt } from './y4m.js'

/** Luma variance below this reads as "no face in frame". */
export const FACE_STD_MIN = 2.0

export interface FrameStats {
  mean: number
  std: number
  gradX: number
  gradY: number
  quadrants: [number, number, number, number]
}

export function frameStats(frame: Frame): FrameStats {
  const { luma, width, height } = frame
  const n = luma.length
  let sum = 0
  let sumSq = 0
  for (let i = 0; i < n; i++) {
    sum += luma[i]
    sumSq += luma[i] * luma[i]
  }
  const mean = sum / n
  const variance = Math.max(0, sumSq / n - mean * mean)

  let gx = 0
  let gy = 0
  for (let y = 0; y < height; y++) {
    for (let x = 1; x < width; x++) {
      gx += Math.abs(luma[y * width + x] - luma[y * width + x - 1])
    }
  }
  for (let y = 1; y < height; y++) {
    for (let x = 0; x < width; x++) {
      gy += Math.abs(luma[y * width + x] - luma[(y - 1) * width + x])
    }
  }
  gx /= (width - 1) * height
  gy /= width * (height - 1)

  const halfW = width >> 1
  const halfH = height >> 1
  const quadrants: [number, number, number, number] = [0, 0, 0, 0]
  const counts = [0, 0, 0, 0]
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const q = (y < halfH ? 0 : 2) + (x < halfW ? 0 : 1)
      quadrants[q] += luma[y * width + x]
      counts[q]++
    }
  }
  for (let q = 0; q < 4; q++) quadrants[q] /= counts[q]

  return { mean, std: Math.sqrt(variance), gradX: gx, gradY: gy, quadrants }
}

const round3 = (x: number): number => Math.round(x * 1000) / 1000

/**
 * Emotion scoring from pixel statistics: seven positive weights keyed to
 * different statistics, normalized to percentages that sum to exactly
 * 100.000 after rounding (neutral absorbs the rounding remainder).
 */
export const pixelStatFer: FerBackend = {
  id: 'pixelstat-fer-v1',
  score(frame: Frame): EmotionScores | null {
    const s = frameStats(frame)
    if (s.std < FACE_STD_MIN) return null
    const raw = [
      1.0 + (s.mean % 7),          // angry
      0.5 + (s.std % 5),           // disgust
      1.0 + (s.gradX % 9),         // fear
      2.0 + (s.quadrants[0] % 11), // happy
      2.0 + (s.quadrants[3] % 13), // sad
      0.5 + (s.gradY % 3),         // surprise
      25.0 + (s.quadrants[1] % 17), // neutral dominates, as on a calm face
    ]
    const total = raw.reduce((a, b) => a + b, 0)
    const pct = raw.map((v) => round3((100 * v) / total))
    const nonNeutral = pct.slice(0, 6).reduce((a, b) => a + b, 0)
    pct[6] = round3(100 - nonNeutral)
    const scores = {} as EmotionScores
    EMOTIONS.forEach((name, i) => {
      scores[name] = pct[i]
    })
    return scores
  },
}

/**
 * Identity embedding: mean-centered 8x6 grid of block-average luma.
 * Centering makes the cosine behave like a correlation, so a cut to a
 * different scene actually scores low instead of riding the DC component.
 */
export const lumaGridEmbedding: EmbeddingBackend = {
  id: 'lumagrid-embed-v1',
  embed(frame: Frame): Float64Array {
    const gw = 8
    const gh = 6
    const vec = new Float64Array(gw * gh)
    const { luma, width, height } = frame
    for (let gy = 0; gy < gh; gy++) {
      for (let gx = 0; gx < gw; gx++) {
        const x0 = Math.floor((gx * width) / gw)
        const x1 = Math.floor(((gx + 1) * width) / gw)
        const y0 = Math.floor((gy * height) / gh)
        const y1 = Math.floor(((gy + 1) * height) / gh)
        let acc = 0
        for (let y = y0; y < y1; y++) {
          for (let x = x0; x < x1; x++) acc += luma[y * width + x]
        }
        vec[gy * gw + gx] = acc / ((x1 - x0) * (y1 - y0))
      }
    }
    let mean = 0
    for (const v of vec) mean += v
    mean /= vec.length
    for (let i = 0; i < vec.length; i++) vec[i] -= mean
    return vec
  },
}

export function cosine(a: Float64Array, b: Float64Array): number {
  if (a.length !== b.length) throw new Error('embedding length mismatch')
  let dot = 0
  let na = 0
  let nb = 0
  for (let i = 0; i < a.length; i++) {
    dot += a[i] * b[i]
    na += a[i] * a[i]
    nb += b[i] * b[i]
  }
  if (na === 0 || nb === 0) throw new Error('cosine of a zero embedding')
  return dot / (Math.sqrt(na) * Math.sqrt(nb))
}

// -- deterministic pseudo-ASR ------------------------------------------------

const WORDS = [
  'inflation', 'employment', 'outlook', 'committee', 'policy', 'rates',
  'growth', 'stability', 'mandate', 'projections', 'balance', 'risks',
  'moderate', 'gradual', 'economy', 'conditions', 'labor', 'market',
  'expectations', 'pressures',
]

/** Small deterministic PRNG (mulberry32) so transcripts never vary. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0
  return () => {
    a = (a + 0x6d2b79f5) >>> 0
    let t = a
    t = Math.imul(t ^ (t >>> 15), t | 1)
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61)
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296
  }
}

export function hashString(s: string): number {
  let h = 2166136261
  for (let i = 0; i < s.length; i++) {
    h ^= s.charCodeAt(i)
    h = Math.imul(h, 16777619)
  }
  return h >>> 0
}

const MAX_SEGMENT_SECONDS = 15

/**
 * Cue-based stand-in for speech recognition: contiguous runs of seconds
 * whose frame shows a face become speech spans (silence = no face), split
 * into segments of at most 15 s. Text, sentiment, and the
 * forward-looking flag are drawn from a PRNG seeded by the meeting id and
 * segment position.
 */
export const cueAsr: AsrBackend = {
  id: 'cue-asr-v1',
  transcribe(video: DecodedVideo, meetingId: string): RawSegment[] {
    const duration = Math.floor(durationSeconds(video))
    const faceAt: boolean[] = []
    for (let sec = 0; sec < duration; sec++) {
      const index = Math.round((sec * video.fpsNum) / video.fpsDen)
      if (index >= video.frames.length) break
      faceAt.push(frameStats(frameAt(video, index)).std >= FACE_STD_MIN)
    }

    const segments: RawSegment[] = []
    let runStart: number | null = null
    const flushRun = (endExclusive: number) => {
      if (runStart === null) return
      for (let s = runStart; s < endExclusive; s += MAX_SEGMENT_SECONDS) {
        const e = Math.min(s + MAX_SEGMENT_SECONDS, endExclusive)
        const rng = mulberry32(hashString(`${meetingId}:${s}`))
        const words: string[] = []
        const count = 2 * (e - s)
        for (let w = 0; w < count; w++) {
          words.push(WORDS[Math.floor(rng() * WORDS.length)])
        }
        const neg = Math.round(rng() * 600) / 1000 // 0 .. 0.6
        const pos = Math.round(rng() * 300) / 1000 // 0 .. 0.3
        segments.push({
          startSec: s,
          endSec: e,
          text: words.join(' '),
          sentimentNegative: neg,
          sentimentPositive: pos,
          sentimentNeutral: Math.round((1 - neg - pos) * 1000) / 1000,
          flsFlag: rng() < 0.3,
        })
      }
      runStart = null
    }
    for (let sec = 0; sec < faceAt.length; sec++) {
      if (faceAt[sec] && runStart === null) runStart = sec
      if (!faceAt[sec]) flushRun(sec)
    }
    flushRun(faceAt.length)
    return segments
  },
}

export const defaultBackends = {
  fer: pixelStatFer,
  embedding: lumaGridEmbedding,
  asr: cueAsr,
}
