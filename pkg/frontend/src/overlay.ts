/**
 * Pure rendering helpers: given a 2D drawing surface and view state, paint
 * the mask/channel overlay and the click markers. Kept free of DOM lookups
 * so rendering is a pure function of its inputs and testable with a
 * recording context.
 */

import type { ClickMarker } from "./types";

/** Subset of CanvasRenderingContext2D the overlay painter needs. */
export interface DrawSurface {
  globalAlpha: number;
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
  stroke(): void;
  drawImage(image: CanvasImageSource, dx: number, dy: number, dw: number, dh: number): void;
}

export const POSITIVE_COLOR = "rgb(34, 197, 94)"; // green dots
export const NEGATIVE_COLOR = "rgb(239, 68, 68)"; // red dots
export const MARKER_RADIUS = 5;

export interface DrawRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

/** Paint the overlay bitmap (mask or channel) over the image rectangle. */
export function drawOverlay(
  ctx: DrawSurface,
  bitmap: CanvasImageSource,
  rect: DrawRect,
  opacity: number,
): void {
  ctx.globalAlpha = opacity;
  ctx.drawImage(bitmap, rect.x, rect.y, rect.width, rect.height);
  ctx.globalAlpha = 1;
}

/** Paint click markers in image order: green = positive, red = negative. */
export function drawMarkers(
  ctx: DrawSurface,
  markers: ClickMarker[],
  rect: DrawRect,
  imageWidth: number,
  imageHeight: number,
): void {
  for (const m of markers) {
    const cx = rect.x + ((m.x + 0.5) / imageWidth) * rect.width;
    const cy = rect.y + ((m.y + 0.5) / imageHeight) * rect.height;
    ctx.beginPath();
    ctx.arc(cx, cy, MARKER_RADIUS, 0, Math.PI * 2);
    ctx.fillStyle = m.polarity === "pos" ? POSITIVE_COLOR : NEGATIVE_COLOR;
    ctx.fill();
    ctx.strokeStyle = "white";
    ctx.lineWidth = 1.5;
    ctx.stroke();
  }
}

/**
 * Whether a grayscale view (RGBA pixel buffer) is uniformly a single value,
 * e.g. the no-click SpPos channel (255) or Object channel (0).
 */
export function isUniformGray(rgba: Uint8ClampedArray, value: number): boolean {
  for (let i = 0; i < rgba.length; i += 4) {
    if (rgba[i] !== value || rgba[i + 1] !== value || rgba[i + 2] !== value) {
      return false;
    }
  }
  return rgba.length > 0;
}
