export const EMOTIONS = [
  'angry', 'disgust', 'fear', 'happy', 'sad', 'surprise', 'neutral',
] as const

export type Emotion = (typeof EMOTIONS)[number]

export type EmotionScores = Record<Emotion, number>

/** One decoded grayscale frame (luma plane only). */
export interface Frame {
  luma: Uint8Array
  width: number
  height: number
}

/** A decoded fixed-rate video: luma planes in display order. */
export interface DecodedVideo {
  width: number
  height: number
  fpsNum: number
  fpsDen: number
  frames: Uint8Array[]
}

/** Everything needed to run one extraction. */
export interface ExtractionJob {
  videoPath: string
  meetingId: string
  referencePath: string
  outDir: string
  /** Sampling interval in whole seconds (> 0). */
  intervalSeconds: number
  /** Wall-clock UTC time of video t=0; drives output timestamps. */
  startTime: Date
  /** Frames at or above this embedding similarity count as the chair. */
  similarityThreshold: number
}

export interface FrameRecord {
  meeting_id: string
  /** Naive ISO seconds, UTC (file header carries #tz=UTC). */
  t: string
  face_detected: boolean
  angry: number | null
  disgust: number | null
  fear: number | null
  happy: number | null
  sad: number | null
  surprise: number | null
  neutral: number | null
  chair_similarity: number | null
}

export interface TranscriptRecord {
  meeting_id: string
  t_start: string
  t_end: string
  text: string
  speaker: 'chair' | 'journalist' | 'other'
  sentiment_negative: number
  sentiment_positive: number
  sentiment_neutral: number
  fls_flag: boolean
}

/** An unlabeled speech span as produced by a transcription backend. */
export interface RawSegment {
  startSec: number
  endSec: number
  text: string
  sentimentNegative: number
  sentimentPositive: number
  sentimentNeutral: number
  flsFlag: boolean
}

export interface FerBackend {
  id: string
  /** Seven emotion percentages summing to ~100, or null when no face. */
  score(frame: Frame): EmotionScores | null
}

export interface EmbeddingBackend {
  id: string
  embed(frame: Frame): Float64Array
}

export interface AsrBackend {
  id: string
  /** Speech spans in video-relative seconds, sorted and non-overlapping. */
  transcribe(video: DecodedVideo, meetingId: string): RawSegment[]
}

export interface Backends {
  fer: FerBackend
  embedding: EmbeddingBackend
  asr: AsrBackend
}
