// Canvas-backed PNG decode/encode. Browser-only: the pure pipeline in
// pixels.ts/overlays.ts never touches these.

import type { ImageBuffer } from "./types.js";

export async function decodeBase64Png(imageB64: string): Promise<ImageBuffer> {
  const image = new Image();
  image.src = `data:image/png;base64,${imageB64}`;
  await image.decode();
  const canvas = document.createElement("canvas");
  canvas.width = image.naturalWidth;
  canvas.height = image.naturalHeight;
  const context = canvas.getContext("2d");
  if (!context) throw new Error("canvas 2d context unavailable");
  context.drawImage(image, 0, 0);
  const data = context.getImageData(0, 0, canvas.width, canvas.height);
  return { width: data.width, height: data.height, data: data.data };
}

function toImageData(buffer: ImageBuffer): ImageData {
  // Copy into a fresh backing buffer: ImageData requires a non-shared one.
  const data = new Uint8ClampedArray(buffer.data);
  return new ImageData(data, buffer.width, buffer.height);
}

export function encodeBufferAsPngB64(buffer: ImageBuffer): string {
  const canvas = document.createElement("canvas");
  canvas.width = buffer.width;
  canvas.height = buffer.height;
  const context = canvas.getContext("2d");
  if (!context) throw new Error("canvas 2d context unavailable");
  context.putImageData(toImageData(buffer), 0, 0);
  const dataUrl = canvas.toDataURL("image/png");
  return dataUrl.slice("data:image/png;base64,".length);
}

export function paintBufferTo(canvas: HTMLCanvasElement, buffer: ImageBuffer): void {
  canvas.width = buffer.width;
  canvas.height = buffer.height;
  const context = canvas.getContext("2d");
  if (!context) throw new Error("canvas 2d context unavailable");
  context.putImageData(toImageData(buffer), 0, 0);
}
