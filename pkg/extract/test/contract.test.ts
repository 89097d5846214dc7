/**
 * Contract with the consuming pipeline: the emitted files must parse and
 * validate cleanly in the installed `fomcface` CLI, rows must satisfy the
 * documented numeric bands, and reruns must be byte-identical.
 */

import { spawnSync } from 'node:child_process'
import { mkdtempSync, readFileSync } from 'node:fs'
import { tmpdir } from 'node:os'
import { join } from 'node:path'
import { describe, expect, it } from 'vitest'
import { defaultBackends } from '../src/backends.js'
import { runExtraction } from '../src/extract.js'
import { makeSampleClip } from '../src/sample.js'
import { headerLines, writeFrameScores, writeTranscript, atomicWrite } from '../src/serialize.js'
import { writePgm, writeY4m } from '../src/y4m.js'
import { EMOTIONS } from '../src/types.js'

const START = new Date('2014-06-18T14:30:00Z')

function extractSampleTo(outDir: string): void {
  const { video, reference } = makeSampleClip(60, 7)
  const result = runExtraction(video, reference, '2014-06-18', START, 2, 0.5, defaultBackends)
  const headers = headerLines(defaultBackends, 2)
  writeFrameScores(outDir, result.frameRecords, headers)
  writeTranscript(outDir, result.transcriptRecords, headers)
}

describe('60-second sample clip contract', () => {
  const outDir = mkdtempSync(join(tmpdir(), 'extract-contract-'))
  extractSampleTo(outDir)
  const frameLines = readFileSync(join(outDir, 'frame_scores.jsonl'), 'utf-8')
    .split('\n')
    .filter((l) => l && !l.startsWith('#'))

  it('emits ceil(60 / 2) = 30 frame records', () => {
    expect(frameLines).toHaveLength(30)
  })

  it('keeps every face row inside the 100 ± 1 sum band', () => {
    let faces = 0
    for (const line of frameLines) {
      const rec = JSON.parse(line)
      if (!rec.face_detected) continue
      faces++
      const total = EMOTIONS.reduce((acc, e) => acc + rec[e], 0)
      expect(Math.abs(total - 100)).toBeLessThanOrEqual(1)
    }
    expect(faces).toBeGreaterThan(0)
  })

  it('passes the consuming validator with zero errors', () => {
    const proc = spawnSync('fomcface', ['validate', outDir], { encoding: 'utf-8' })
    expect(proc.error, 'fomcface CLI must be installed for the contract test').toBeUndefined()
    expect(proc.stdout).toContain('OK frame_scores.jsonl: 30 records')
    expect(proc.stdout).toContain('OK transcript.jsonl')
    expect(proc.stdout).toContain('PASSED: 0 error(s)')
    expect(proc.status).toBe(0)
  })

  it('reproduces byte-identical files on a rerun', () => {
    const again = mkdtempSync(join(tmpdir(), 'extract-contract-rerun-'))
    extractSampleTo(again)
    for (const name of ['frame_scores.jsonl', 'transcript.jsonl']) {
      expect(readFileSync(join(again, name), 'utf-8')).toBe(
        readFileSync(join(outDir, name), 'utf-8'),
      )
    }
  })
})

describe('command-line round trip', () => {
  it('sample + extract via the CLI validates cleanly', () => {
    const dir = mkdtempSync(join(tmpdir(), 'extract-cli-'))
    const cliPath = join(__dirname, '..', 'dist', 'cli.js')

    const sample = spawnSync(
      'node',
      [cliPath, 'sample', '--out-dir', dir, '--seconds', '60', '--seed', '7'],
      { encoding: 'utf-8' },
    )
    expect(sample.status, sample.stderr).toBe(0)

    const outDir = join(dir, 'out')
    const run = spawnSync(
      'node',
      [
        cliPath,
        '--video', join(dir, 'sample.y4m'),
        '--meeting-id', '2014-06-18',
        '--reference', join(dir, 'reference.pgm'),
        '--out-dir', outDir,
        '--start', '2014-06-18T14:30:00',
      ],
      { encoding: 'utf-8' },
    )
    expect(run.status, run.stderr).toBe(0)
    expect(run.stdout).toContain('30 frames')

    const proc = spawnSync('fomcface', ['validate', outDir], { encoding: 'utf-8' })
    expect(proc.status).toBe(0)
    expect(proc.stdout).toContain('PASSED: 0 error(s)')
  })

  it('fails loudly on a zero-length video', () => {
    const dir = mkdtempSync(join(tmpdir(), 'extract-cli-empty-'))
    const empty = { width: 64, height: 48, fpsNum: 1, fpsDen: 1, frames: [] }
    atomicWrite(join(dir, 'empty.y4m'), writeY4m(empty))
    const { reference } = makeSampleClip(10, 7)
    atomicWrite(join(dir, 'reference.pgm'), writePgm(reference))
    const cliPath = join(__dirname, '..', 'dist', 'cli.js')
    const run = spawnSync(
      'node',
      [
        cliPath,
        '--video', join(dir, 'empty.y4m'),
        '--meeting-id', 'mtg',
        '--reference', join(dir, 'reference.pgm'),
        '--out-dir', join(dir, 'out'),
      ],
      { encoding: 'utf-8' },
    )
    expect(run.status).not.toBe(0)
    expect(run.stderr).toContain('zero duration')
  })
})
