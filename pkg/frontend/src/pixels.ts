// Pure pixel operations on RGBA buffers. No DOM, no canvas: the browser layer
// converts to/from canvas ImageData at the edges, so everything here runs and
// tests in node.

import { gaussian } from "./prng.js";
import type { ImageBuffer } from "./types.js";

export function cloneBuffer(buffer: ImageBuffer): ImageBuffer {
  return {
    width: buffer.width,
    height: buffer.height,
    data: new Uint8ClampedArray(buffer.data),
  };
}

export function buffersEqual(a: ImageBuffer, b: ImageBuffer): boolean {
  if (a.width !== b.width || a.height !== b.height) return false;
  if (a.data.length !== b.data.length) return false;
  for (let i = 0; i < a.data.length; i++) {
    if (a.data[i] !== b.data[i]) return false;
  }
  return true;
}

/**
 * Add zero-mean Gaussian noise to the RGB channels, rounding and clamping to
 * [0, 255]. Alpha is untouched. sigma = 0 returns an identical copy, so the
 * flatten pipeline is a pixel no-op without interventions.
 */
export function applyNoise(buffer: ImageBuffer, sigma: number, seed: number): ImageBuffer {
  if (sigma < 0) throw new Error(`sigma must be >= 0, got ${sigma}`);
  const out = cloneBuffer(buffer);
  if (sigma === 0) return out;
  const draw = gaussian(seed);
  const data = out.data;
  for (let i = 0; i < data.length; i += 4) {
    data[i] = data[i] + sigma * draw();
    data[i + 1] = data[i + 1] + sigma * draw();
    data[i + 2] = data[i + 2] + sigma * draw();
    // Uint8ClampedArray assignment rounds and clamps.
  }
  return out;
}

export function parseColor(color: string): [number, number, number] {
  const match = /^#([0-9a-f]{6})$/i.exec(color);
  if (!match) throw new Error(`expected #rrggbb color, got ${color}`);
  const value = parseInt(match[1], 16);
  return [(value >> 16) & 0xff, (value >> 8) & 0xff, value & 0xff];
}

export function setPixel(
  buffer: ImageBuffer,
  x: number,
  y: number,
  rgb: [number, number, number],
): void {
  if (x < 0 || y < 0 || x >= buffer.width || y >= buffer.height) return;
  const offset = (y * buffer.width + x) * 4;
  buffer.data[offset] = rgb[0];
  buffer.data[offset + 1] = rgb[1];
  buffer.data[offset + 2] = rgb[2];
  buffer.data[offset + 3] = 255;
}

export function fillRect(
  buffer: ImageBuffer,
  x: number,
  y: number,
  width: number,
  height: number,
  rgb: [number, number, number],
): void {
  for (let yy = y; yy < y + height; yy++) {
    for (let xx = x; xx < x + width; xx++) {
      setPixel(buffer, xx, yy, rgb);
    }
  }
}

export function strokeRect(
  buffer: ImageBuffer,
  x: number,
  y: number,
  width: number,
  height: number,
  rgb: [number, number, number],
): void {
  fillRect(buffer, x, y, width, 1, rgb);
  fillRect(buffer, x, y + height - 1, width, 1, rgb);
  fillRect(buffer, x, y, 1, height, rgb);
  fillRect(buffer, x + width - 1, y, 1, height, rgb);
}

/** Bresenham line with square brush of the given thickness. */
export function drawLine(
  buffer: ImageBuffer,
  x0: number,
  y0: number,
  x1: number,
  y1: number,
  rgb: [number, number, number],
  thickness: number,
): void {
  const radius = Math.max(0, Math.floor((thickness - 1) / 2));
  let x = x0;
  let y = y0;
  const dx = Math.abs(x1 - x0);
  const dy = -Math.abs(y1 - y0);
  const sx = x0 < x1 ? 1 : -1;
  const sy = y0 < y1 ? 1 : -1;
  let err = dx + dy;
  for (;;) {
    fillRect(buffer, x - radius, y - radius, 2 * radius + 1, 2 * radius + 1, rgb);
    if (x === x1 && y === y1) break;
    const doubled = 2 * err;
    if (doubled >= dy) {
      err += dy;
      x += sx;
    }
    if (doubled <= dx) {
      err += dx;
      y += sy;
    }
  }
}
