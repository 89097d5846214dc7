/**
 * Canonical file emission. Headers carry the timezone directive plus the
 * model identifiers that produced the rows; writes are atomic
 * (write-then-rename) so a crashed run never leaves a half file behind.
 */

import { mkdirSync, renameSync, writeFileSync } from 'node:fs'
import { dirname, join } from 'node:path'
import type { Backends, FrameRecord, TranscriptRecord } from './types.js'

export function headerLines(backends: Backends, intervalSeconds: number): string[] {
  return [
    '#tz=UTC',
    `#model_fer=${backends.fer.id}`,
    `#model_embedding=${backends.embedding.id}`,
    `#model_asr=${backends.asr.id}`,
    `#interval_s=${intervalSeconds}`,
  ]
}

export function atomicWrite(path: string, content: string | Buffer): void {
  mkdirSync(dirname(path), { recursive: true })
  const tmp = `${path}.tmp-${process.pid}`
  if (typeof content === 'string') writeFileSync(tmp, content, 'utf-8')
  else writeFileSync(tmp, content)
  renameSync(tmp, path)
}

function jsonl(headers: string[], rows: unknown[]): string {
  const lines = [...headers, ...rows.map((r) => JSON.stringify(r))]
  return lines.join('\n') + '\n'
}

export function writeFrameScores(
  outDir: string,
  records: FrameRecord[],
  headers: string[],
): string {
  const path = join(outDir, 'frame_scores.jsonl')
  atomicWrite(path, jsonl(headers, records))
  return path
}

export function writeTranscript(
  outDir: string,
  records: TranscriptRecord[],
  headers: string[],
): string {
  const path = join(outDir, 'transcript.jsonl')
  atomicWrite(path, jsonl(headers, records))
  return path
}
