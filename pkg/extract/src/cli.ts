#!/usr/bin/env node
/**
 * extract --video clip.y4m --meeting-id 2014-06-18 --reference ref.pgm \
 *         --out-dir out [--interval 2] [--start 2014-06-18T14:30:00] \
 *         [--similarity-threshold 0.5]
 *
 * Emits frame_scores.jsonl and transcript.jsonl in the canonical formats.
 * `extract sample --out-dir dir [--seconds 60] [--seed 7]` writes demo
 * footage (sample.y4m + reference.pgm) to extract from.
 */

import { readFileSync } from 'node:fs'
import { join } from 'node:path'
import yargs from 'yargs'
import { hideBin } from 'yargs/helpers'
import { defaultBackends } from './backends.js'
import { runExtraction } from './extract.js'
import { makeSampleClip } from './sample.js'
import { headerLines, atomicWrite, writeFrameScores, writeTranscript } from './serialize.js'
import { parsePgm, parseY4m, writePgm, writeY4m } from './y4m.js'

function parseStart(raw: string): Date {
  const normalized = /[zZ]$|[+-]\d\d:\d\d$/.test(raw) ? raw : `${raw}Z`
  const date = new Date(normalized)
  if (Number.isNaN(date.getTime())) throw new Error(`unparseable --start time: ${raw}`)
  if (date.getMilliseconds() !== 0) throw new Error('--start must be whole seconds')
  return date
}

await yargs(hideBin(process.argv))
  .scriptName('extract')
  .command(
    '$0',
    'score a press-conference video into canonical frame and transcript files',
    (y) =>
      y
        .option('video', { type: 'string', demandOption: true, describe: 'input .y4m clip' })
        .option('meeting-id', { type: 'string', demandOption: true })
        .option('reference', {
          type: 'string',
          demandOption: true,
          describe: 'reference frame of the chair (.pgm)',
        })
        .option('out-dir', { type: 'string', demandOption: true })
        .option('interval', {
          type: 'number',
          default: 2,
          describe: 'sampling interval, whole seconds',
        })
        .option('start', {
          type: 'string',
          default: '1970-01-01T00:00:00',
          describe: 'UTC wall-clock time of video t=0',
        })
        .option('similarity-threshold', { type: 'number', default: 0.5 }),
    (argv) => {
      if (!Number.isInteger(argv.interval) || argv.interval <= 0) {
        throw new Error('--interval must be a positive whole number of seconds')
      }
      const video = parseY4m(readFileSync(argv.video))
      const reference = parsePgm(readFileSync(argv.reference))
      const result = runExtraction(
        video,
        reference,
        argv['meeting-id'],
        parseStart(argv.start),
        argv.interval,
        argv['similarity-threshold'],
        defaultBackends,
      )
      const headers = headerLines(defaultBackends, argv.interval)
      const framesPath = writeFrameScores(argv['out-dir'], result.frameRecords, headers)
      const transcriptPath = writeTranscript(argv['out-dir'], result.transcriptRecords, headers)
      const faces = result.frameRecords.filter((r) => r.face_detected).length
      console.log(`wrote ${framesPath} (${result.frameRecords.length} frames, ${faces} with a face)`)
      console.log(`wrote ${transcriptPath} (${result.transcriptRecords.length} segments)`)
    },
  )
  .command(
    'sample',
    'write deterministic demo footage (sample.y4m + reference.pgm)',
    (y) =>
      y
        .option('out-dir', { type: 'string', demandOption: true })
        .option('seconds', { type: 'number', default: 60 })
        .option('seed', { type: 'number', default: 7 }),
    (argv) => {
      const { video, reference } = makeSampleClip(argv.seconds, argv.seed)
      const videoPath = join(argv['out-dir'], 'sample.y4m')
      const refPath = join(argv['out-dir'], 'reference.pgm')
      atomicWrite(videoPath, writeY4m(video))
      atomicWrite(refPath, writePgm(reference))
      console.log(`wrote ${videoPath} (${argv.seconds}s at 1 fps)`)
      console.log(`wrote ${refPath}`)
    },
  )
  .strict()
  .demandCommand(0)
  .fail((msg, err) => {
    console.error(err?.message ?? msg)
    process.exit(1)
  })
  .parseAsync()
