/**
 * The extraction pipeline: fixed-interval frame sampling, per-frame
 * scoring against a reference face, and speech-span labeling. Consumers
 * downstream read only the two emitted files, so everything here funnels
 * into FrameRecord / TranscriptRecord rows.
 */

import type {
  Backends,
  DecodedVideo,
  Frame,
  FrameRecord,
  RawSegment,
  TranscriptRecord,
} from './types.js'
import { cosine } from './backends.js'
import { durationSeconds, frameAt } from './y4m.js'

/** Video-relative sample times: 0, interval, 2*interval, ... < duration. */
export function sampleTimestamps(duration: number, intervalSeconds: number): number[] {
  if (!(intervalSeconds > 0)) throw new Error('interval must be positive')
  if (!(duration > 0)) throw new Error('video has zero duration')
  const times: number[] = []
  for (let t = 0; t < duration; t += intervalSeconds) times.push(t)
  return times
}

export interface SampledFrame {
  tSec: number
  frame: Frame
}

export function extractFrames(video: DecodedVideo, intervalSeconds: number): SampledFrame[] {
  const times = sampleTimestamps(durationSeconds(video), intervalSeconds)
  return times.map((tSec) => {
    const index = Math.round((tSec * video.fpsNum) / video.fpsDen)
    return { tSec, frame: frameAt(video, index) }
  })
}

const round4 = (x: number): number => Math.round(x * 10000) / 10000

function framesIdentical(a: Frame, b: Frame): boolean {
  if (a.width !== b.width || a.height !== b.height) return false
  for (let i = 0; i < a.luma.length; i++) {
    if (a.luma[i] !== b.luma[i]) return false
  }
  return true
}

export function similarityTo(
  reference: Frame,
  frame: Frame,
  backends: Pick<Backends, 'embedding'>,
): number {
  if (framesIdentical(reference, frame)) return 1.0
  const sim = cosine(backends.embedding.embed(frame), backends.embedding.embed(reference))
  // the canonical field is bounded [0, 1]; anti-correlated scenes floor at 0
  return Math.min(1, Math.max(0, round4(sim)))
}

export function isoNaiveSeconds(date: Date): string {
  return date.toISOString().slice(0, 19)
}

export function scoreFrames(
  sampled: SampledFrame[],
  reference: Frame,
  meetingId: string,
  startTime: Date,
  backends: Backends,
): FrameRecord[] {
  return sampled.map(({ tSec, frame }) => {
    const scores = backends.fer.score(frame)
    const t = isoNaiveSeconds(new Date(startTime.getTime() + tSec * 1000))
    if (scores === null) {
      return {
        meeting_id: meetingId,
        t,
        face_detected: false,
        angry: null,
        disgust: null,
        fear: null,
        happy: null,
        sad: null,
        surprise: null,
        neutral: null,
        chair_similarity: null,
      }
    }
    return {
      meeting_id: meetingId,
      t,
      face_detected: true,
      ...scores,
      chair_similarity: similarityTo(reference, frame, backends),
    }
  })
}

/**
 * A speech span belongs to the chair when the majority of the scored,
 * face-bearing frames inside [startSec, endSec) meet the similarity
 * threshold; a majority below it marks a journalist question. Spans with
 * no scored face frame at all are labeled "other".
 */
export function labelSpeaker(
  segment: RawSegment,
  sampled: SampledFrame[],
  records: FrameRecord[],
  threshold: number,
): 'chair' | 'journalist' | 'other' {
  let chairVotes = 0
  let journalistVotes = 0
  for (let i = 0; i < sampled.length; i++) {
    const { tSec } = sampled[i]
    if (tSec < segment.startSec || tSec >= segment.endSec) continue
    const sim = records[i].chair_similarity
    if (sim === null) continue
    if (sim >= threshold) chairVotes++
    else journalistVotes++
  }
  if (chairVotes === 0 && journalistVotes === 0) return 'other'
  return chairVotes >= journalistVotes ? 'chair' : 'journalist'
}

export function toTranscriptRecords(
  segments: RawSegment[],
  sampled: SampledFrame[],
  records: FrameRecord[],
  meetingId: string,
  startTime: Date,
  threshold: number,
): TranscriptRecord[] {
  return segments.map((seg) => ({
    meeting_id: meetingId,
    t_start: isoNaiveSeconds(new Date(startTime.getTime() + seg.startSec * 1000)),
    t_end: isoNaiveSeconds(new Date(startTime.getTime() + seg.endSec * 1000)),
    text: seg.text,
    speaker: labelSpeaker(seg, sampled, records, threshold),
    sentiment_negative: seg.sentimentNegative,
    sentiment_positive: seg.sentimentPositive,
    sentiment_neutral: seg.sentimentNeutral,
    fls_flag: seg.flsFlag,
  }))
}

export interface ExtractionResult {
  frameRecords: FrameRecord[]
  transcriptRecords: TranscriptRecord[]
}

export function runExtraction(
  video: DecodedVideo,
  reference: Frame,
  meetingId: string,
  startTime: Date,
  intervalSeconds: number,
  similarityThreshold: number,
  backends: Backends,
): ExtractionResult {
  if (backends.fer.score(reference) === null) {
    throw new Error('reference frame contains no detectable face')
  }
  const sampled = extractFrames(video, intervalSeconds)
  const frameRecords = scoreFrames(sampled, reference, meetingId, startTime, backends)
  const rawSegments = backends.asr.transcribe(video, meetingId)
  const transcriptRecords = toTranscriptRecords(
    rawSegments, sampled, frameRecords, meetingId, startTime, similarityThreshold,
  )
  return { frameRecords, transcriptRecords }
}
