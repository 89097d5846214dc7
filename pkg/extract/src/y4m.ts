/**
 * Minimal YUV4MPEG2 (.y4m) reader/writer and binary PGM (P5) support.
 * Only 4:2:0 chroma is handled; everything else errors loudly. The luma
 * plane is all downstream scoring uses, so chroma is parsed but discarded.
 */

import type { DecodedVideo, Frame } from './types.js'

const Y4M_MAGIC = 'YUV4MPEG2'

export function parseY4m(data: Buffer): DecodedVideo {
  const headerEnd = data.indexOf(0x0a)
  if (headerEnd < 0) throw new Error('y4m: missing stream header')
  const header = data.subarray(0, headerEnd).toString('ascii')
  const tokens = header.split(' ')
  if (tokens[0] !== Y4M_MAGIC) throw new Error('y4m: bad magic')

  let width = 0
  let height = 0
  let fpsNum = 0
  let fpsDen = 1
  let chroma = '420'
  for (const tok of tokens.slice(1)) {
    if (tok.startsWith('W')) width = parseInt(tok.slice(1), 10)
    else if (tok.startsWith('H')) height = parseInt(tok.slice(1), 10)
    else if (tok.startsWith('F')) {
      const [num, den] = tok.slice(1).split(':').map((v) => parseInt(v, 10))
      fpsNum = num
      fpsDen = den || 1
    } else if (tok.startsWith('C')) chroma = tok.slice(1)
  }
  if (!(width > 0) || !(height > 0)) throw new Error('y4m: missing W/H')
  if (!(fpsNum > 0)) throw new Error('y4m: missing frame rate')
  if (!chroma.startsWith('420')) throw new Error(`y4m: unsupported chroma C${chroma}`)

  const lumaSize = width * height
  const frameSize = lumaSize + 2 * ((width / 2) * (height / 2))
  const frames: Uint8Array[] = []
  let offset = headerEnd + 1
  while (offset < data.length) {
    const markerEnd = data.indexOf(0x0a, offset)
    if (markerEnd < 0) throw new Error('y4m: truncated FRAME marker')
    const marker = data.subarray(offset, markerEnd).toString('ascii')
    if (!marker.startsWith('FRAME')) throw new Error(`y4m: expected FRAME, got "${marker.slice(0, 16)}"`)
    const body = markerEnd + 1
    if (body + frameSize > data.length) throw new Error('y4m: truncated frame payload')
    frames.push(Uint8Array.prototype.slice.call(data.subarray(body, body + lumaSize)))
    offset = body + frameSize
  }
  return { width, height, fpsNum, fpsDen, frames }
}

export function writeY4m(video: DecodedVideo): Buffer {
  const { width, height, fpsNum, fpsDen, frames } = video
  const header = `${Y4M_MAGIC} W${width} H${height} F${fpsNum}:${fpsDen} Ip A1:1 C420jpeg\n`
  const chromaSize = (width / 2) * (height / 2)
  const chroma = Buffer.alloc(2 * chromaSize, 128)
  const parts: Buffer[] = [Buffer.from(header, 'ascii')]
  for (const luma of frames) {
    if (luma.length !== width * height) throw new Error('y4m: luma plane has wrong size')
    parts.push(Buffer.from('FRAME\n', 'ascii'), Buffer.from(luma), chroma)
  }
  return Buffer.concat(parts)
}

export function durationSeconds(video: DecodedVideo): number {
  return (video.frames.length * video.fpsDen) / video.fpsNum
}

export function frameAt(video: DecodedVideo, index: number): Frame {
  if (index < 0 || index >= video.frames.length) {
    throw new Error(`frame index ${index} outside [0, ${video.frames.length})`)
  }
  return { luma: video.frames[index], width: video.width, height: video.height }
}

/** Binary PGM (P5), the reference-frame format. */
export function parsePgm(data: Buffer): Frame {
  let pos = 0
  const nextToken = (): string => {
    while (pos < data.length) {
      const ch = data[pos]
      if (ch === 0x23) {
        // comment runs to end of line
        while (pos < data.length && data[pos] !== 0x0a) pos++
      } else if (ch === 0x20 || ch === 0x09 || ch === 0x0a || ch === 0x0d) {
        pos++
      } else break
    }
    const start = pos
    while (pos < data.length && ![0x20, 0x09, 0x0a, 0x0d].includes(data[pos])) pos++
    return data.subarray(start, pos).toString('ascii')
  }
  if (nextToken() !== 'P5') throw new Error('pgm: not a binary PGM (P5)')
  const width = parseInt(nextToken(), 10)
  const height = parseInt(nextToken(), 10)
  const maxval = parseInt(nextToken(), 10)
  if (!(width > 0) || !(height > 0)) throw new Error('pgm: bad dimensions')
  if (maxval !== 255) throw new Error(`pgm: only maxval 255 supported, got ${maxval}`)
  pos++ // single whitespace after maxval
  if (pos + width * height > data.length) throw new Error('pgm: truncated pixel data')
  return {
    luma: Uint8Array.prototype.slice.call(data.subarray(pos, pos + width * height)),
    width,
    height,
  }
}

export function writePgm(frame: Frame): Buffer {
  const header = `P5\n${frame.width} ${frame.height}\n255\n`
  return Buffer.concat([Buffer.from(header, 'ascii'), Buffer.from(frame.luma)])
}
