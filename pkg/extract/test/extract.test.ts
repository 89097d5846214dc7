import { describe, expect, it } from 'vitest'
import {
  cueAsr,
  defaultBackends,
  frameStats,
  pixelStatFer,
} from '../src/backends.js'
import {
  extractFrames,
  labelSpeaker,
  runExtraction,
  sampleTimestamps,
  scoreFrames,
  similarityTo,
  toTranscriptRecords,
} from '../src/extract.js'
import { makeSampleClip, sceneAt } from '../src/sample.js'
import { headerLines } from '../src/serialize.js'
import { EMOTIONS } from '../src/types.js'
import type { DecodedVideo, Frame } from '../src/types.js'

const START = new Date('2014-06-18T14:30:00Z')

function flatVideo(seconds: number): DecodedVideo {
  const frames: Uint8Array[] = []
  for (let i = 0; i < seconds; i++) frames.push(new Uint8Array(64 * 48).fill(128))
  return { width: 64, height: 48, fpsNum: 1, fpsDen: 1, frames }
}

describe('frame sampling', () => {
  it('emits ceil(duration/interval) timestamps at interval multiples', () => {
    const times = sampleTimestamps(60, 2)
    expect(times).toHaveLength(30)
    expect(times).toHaveLength(Math.ceil(60 / 2))
    times.forEach((t) => expect(t % 2).toBe(0))
    expect(times[0]).toBe(0)
    expect(times.at(-1)).toBe(58)
    expect(sampleTimestamps(61, 2)).toHaveLength(31)
  })

  it('rejects empty clips and bad intervals', () => {
    expect(() => sampleTimestamps(0, 2)).toThrow(/zero duration/)
    expect(() => sampleTimestamps(60, 0)).toThrow(/interval/)
    expect(() => extractFrames({ ...flatVideo(0) }, 2)).toThrow(/zero duration/)
  })

  it('maps each timestamp to the matching stored frame', () => {
    const { video } = makeSampleClip(20, 3)
    const sampled = extractFrames(video, 2)
    expect(sampled).toHaveLength(10)
    sampled.forEach(({ tSec, frame }) => {
      expect(Buffer.from(frame.luma).equals(Buffer.from(video.frames[tSec]))).toBe(true)
    })
  })
})

describe('emotion scoring backend', () => {
  const { reference } = makeSampleClip(10, 7)

  it('returns null on a faceless flat frame', () => {
    const flat: Frame = { luma: new Uint8Array(64 * 48).fill(128), width: 64, height: 48 }
    expect(pixelStatFer.score(flat)).toBeNull()
    expect(frameStats(flat).std).toBe(0)
  })

  it('scores a face frame with percentages summing to exactly 100', () => {
    const scores = pixelStatFer.score(reference)
    expect(scores).not.toBeNull()
    const values = EMOTIONS.map((e) => scores![e])
    values.forEach((v) => {
      expect(v).toBeGreaterThanOrEqual(0)
      expect(v).toBeLessThanOrEqual(100)
    })
    const total = values.reduce((a, b) => a + b, 0)
    expect(Math.abs(total - 100)).toBeLessThan(1e-9)
  })
})

describe('chair similarity', () => {
  const { video, reference } = makeSampleClip(60, 7)

  it('scores the reference against itself as exactly 1', () => {
    expect(similarityTo(reference, reference, defaultBackends)).toBe(1.0)
  })

  it('keeps podium frames high and cutaway frames low, clamped to [0,1]', () => {
    for (let sec = 0; sec < 60; sec++) {
      const frame: Frame = { luma: video.frames[sec], width: 64, height: 48 }
      const scene = sceneAt(sec, 60)
      if (scene === 'empty') continue
      const sim = similarityTo(reference, frame, defaultBackends)
      expect(sim).toBeGreaterThanOrEqual(0)
      expect(sim).toBeLessThanOrEqual(1)
      if (scene === 'chair') expect(sim).toBeGreaterThan(0.9)
      else expect(sim).toBeLessThan(0.5)
    }
  })
})

describe('transcription backend', () => {
  it('returns nothing for a clip with nobody on camera', () => {
    expect(cueAsr.transcribe(flatVideo(30), 'mtg')).toEqual([])
  })

  it('emits sorted, non-overlapping spans inside the clip', () => {
    const { video } = makeSampleClip(60, 7)
    const segments = cueAsr.transcribe(video, 'mtg')
    expect(segments.length).toBeGreaterThan(0)
    for (let i = 0; i < segments.length; i++) {
      expect(segments[i].startSec).toBeLessThan(segments[i].endSec)
      expect(segments[i].endSec).toBeLessThanOrEqual(60)
      if (i > 0) expect(segments[i].startSec).toBeGreaterThanOrEqual(segments[i - 1].endSec)
      expect(segments[i].sentimentNegative).toBeGreaterThanOrEqual(0)
      expect(segments[i].sentimentNegative).toBeLessThanOrEqual(1)
      expect(segments[i].text.length).toBeGreaterThan(0)
    }
  })

  it('is deterministic for a given meeting id', () => {
    const { video } = makeSampleClip(60, 7)
    const a = JSON.stringify(cueAsr.transcribe(video, 'mtg'))
    const b = JSON.stringify(cueAsr.transcribe(video, 'mtg'))
    expect(a).toBe(b)
    const other = JSON.stringify(cueAsr.transcribe(video, 'other-mtg'))
    expect(other).not.toBe(a)
  })
})

describe('speaker labeling', () => {
  const { video, reference } = makeSampleClip(60, 7)
  const sampled = extractFrames(video, 2)
  const records = scoreFrames(sampled, reference, 'mtg', START, defaultBackends)

  it('labels the cutaway span as a journalist question', () => {
    const segments = cueAsr.transcribe(video, 'mtg')
    const rows = toTranscriptRecords(segments, sampled, records, 'mtg', START, 0.5)
    const speakers = rows.map((r) => r.speaker)
    expect(speakers).toContain('chair')
    expect(speakers).toContain('journalist')
  })

  it('falls back to "other" when a span has no scored face frame', () => {
    const gapOnly = { startSec: 56, endSec: 58, text: 'x', sentimentNegative: 0,
      sentimentPositive: 0, sentimentNeutral: 1, flsFlag: false }
    expect(labelSpeaker(gapOnly, sampled, records, 0.5)).toBe('other')
  })
})

describe('whole-job wiring', () => {
  it('rejects a faceless reference frame', () => {
    const { video } = makeSampleClip(10, 7)
    const blank: Frame = { luma: new Uint8Array(64 * 48).fill(100), width: 64, height: 48 }
    expect(() =>
      runExtraction(video, blank, 'mtg', START, 2, 0.5, defaultBackends),
    ).toThrow(/no detectable face/)
  })

  it('stamps wall-clock timestamps on the interval lattice', () => {
    const { video, reference } = makeSampleClip(10, 7)
    const result = runExtraction(video, reference, 'mtg', START, 2, 0.5, defaultBackends)
    expect(result.frameRecords.map((r) => r.t)).toEqual([
      '2014-06-18T14:30:00',
      '2014-06-18T14:30:02',
      '2014-06-18T14:30:04',
      '2014-06-18T14:30:06',
      '2014-06-18T14:30:08',
    ])
  })

  it('emits null emotions if and only if no face was detected', () => {
    const { video, reference } = makeSampleClip(60, 7)
    const result = runExtraction(video, reference, 'mtg', START, 2, 0.5, defaultBackends)
    for (const rec of result.frameRecords) {
      const allNull = EMOTIONS.every((e) => rec[e] === null)
      const noneNull = EMOTIONS.every((e) => rec[e] !== null)
      if (rec.face_detected) {
        expect(noneNull).toBe(true)
      } else {
        expect(allNull).toBe(true)
        expect(rec.chair_similarity).toBeNull()
      }
    }
  })

  it('records the producing models in the file headers', () => {
    const headers = headerLines(defaultBackends, 2)
    expect(headers[0]).toBe('#tz=UTC')
    expect(headers).toContain('#model_fer=pixelstat-fer-v1')
    expect(headers).toContain('#model_embedding=lumagrid-embed-v1')
    expect(headers).toContain('#model_asr=cue-asr-v1')
    expect(headers).toContain('#interval_s=2')
  })
})
