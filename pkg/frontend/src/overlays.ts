// Overlay validation and deterministic rasterization onto pixel buffers.
// Flattening happens client-side so the engine and adapter only ever see
// final pixels; the trace contract stays unchanged.

import { GLYPH_HEIGHT, glyphFor, glyphWidth, textWidth } from "./font.js";
import { applyNoise, cloneBuffer, drawLine, fillRect, parseColor, setPixel, strokeRect } from "./pixels.js";
import type { ImageBuffer, InterventionState, Overlay } from "./types.js";

export function overlayBounds(overlay: Overlay): { x: number; y: number; width: number; height: number } {
  switch (overlay.kind) {
    case "box":
      return { x: overlay.x, y: overlay.y, width: overlay.width, height: overlay.height };
    case "label": {
      const scale = Math.max(1, Math.floor(overlay.scale));
      return {
        x: overlay.x,
        y: overlay.y,
        width: textWidth(overlay.text) * scale,
        height: GLYPH_HEIGHT * scale,
      };
    }
    case "arrow": {
      const x = Math.min(overlay.x, overlay.x2);
      const y = Math.min(overlay.y, overlay.y2);
      return {
        x,
        y,
        width: Math.abs(overlay.x2 - overlay.x) + 1,
        height: Math.abs(overlay.y2 - overlay.y) + 1,
      };
    }
  }
}

/** Error strings for overlays outside the image, empty labels, bad colors. */
export function validateOverlays(
  overlays: Overlay[],
  imageWidth: number,
  imageHeight: number,
): string[] {
  const errors: string[] = [];
  overlays.forEach((overlay, index) => {
    try {
      parseColor(overlay.color);
    } catch {
      errors.push(`overlay ${index}: invalid color ${overlay.color}`);
    }
    if (overlay.kind === "label" && overlay.text.length === 0) {
      errors.push(`overlay ${index}: empty label`);
    }
    if (overlay.kind === "box" && (overlay.width < 1 || overlay.height < 1)) {
      errors.push(`overlay ${index}: box needs positive size`);
    }
    const bounds = overlayBounds(overlay);
    if (
      bounds.x < 0 ||
      bounds.y < 0 ||
      bounds.x + bounds.width > imageWidth ||
      bounds.y + bounds.height > imageHeight
    ) {
      errors.push(`overlay ${index}: outside image bounds`);
    }
  });
  return errors;
}

export function drawOverlay(buffer: ImageBuffer, overlay: Overlay): void {
  const rgb = parseColor(overlay.color);
  switch (overlay.kind) {
    case "box":
      if (overlay.filled) {
        fillRect(buffer, overlay.x, overlay.y, overlay.width, overlay.height, rgb);
      } else {
        strokeRect(buffer, overlay.x, overlay.y, overlay.width, overlay.height, rgb);
      }
      return;
    case "label": {
      const scale = Math.max(1, Math.floor(overlay.scale));
      let cursor = overlay.x;
      for (const character of overlay.text) {
        const glyph = glyphFor(character);
        for (let row = 0; row < GLYPH_HEIGHT; row++) {
          for (let col = 0; col < glyph[row].length; col++) {
            if (glyph[row][col] !== "X") continue;
            fillRect(buffer, cursor + col * scale, overlay.y + row * scale, scale, scale, rgb);
          }
        }
        cursor += (glyphWidth(character) + 1) * scale;
      }
      return;
    }
    case "arrow": {
      drawLine(buffer, overlay.x, overlay.y, overlay.x2, overlay.y2, rgb, overlay.thickness);
      // Two short head strokes rotated ±150 degrees from the shaft.
      const angle = Math.atan2(overlay.y2 - overlay.y, overlay.x2 - overlay.x);
      const headLength = Math.max(4, 3 * overlay.thickness);
      for (const offset of [Math.PI * (5 / 6), -Math.PI * (5 / 6)]) {
        const hx = Math.round(overlay.x2 + headLength * Math.cos(angle + offset));
        const hy = Math.round(overlay.y2 + headLength * Math.sin(angle + offset));
        drawLine(buffer, overlay.x2, overlay.y2, hx, hy, rgb, overlay.thickness);
      }
      setPixel(buffer, overlay.x2, overlay.y2, rgb);
      return;
    }
  }
}

/**
 * Deterministic flatten: overlays rasterized in list order, then Gaussian
 * pixel noise. With no overlays and sigma = 0 the result equals the base
 * buffer byte-for-byte.
 */
export function renderAndFlatten(base: ImageBuffer, state: InterventionState): ImageBuffer {
  const errors = validateOverlays(state.overlays, base.width, base.height);
  if (errors.length) throw new Error(errors.join("; "));
  if (state.noiseSigma < 0) throw new Error("noise sigma must be >= 0");
  let buffer = cloneBuffer(base);
  for (const overlay of state.overlays) {
    drawOverlay(buffer, overlay);
  }
  buffer = applyNoise(buffer, state.noiseSigma, state.noiseSeed);
  return buffer;
}
