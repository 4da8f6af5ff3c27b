// Focus-rectangle geometry, kept byte-for-byte compatible with the
// server's convention: bounding box of the tracked points grown 20% in
// total (center +/- half-extent * 1.2), and a unit half-extent when the
// box is a single point.

import { Camera, FocusRect } from "./types.js";

export const FOCUS_MARGIN = 0.2;
export const FALLBACK_HALF_EXTENT = 1.0;

export function focusRectangle(points: [number, number][]): FocusRect | null {
  if (points.length === 0) return null;
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const [x, y] of points) {
    if (x < minX) minX = x;
    if (x > maxX) maxX = x;
    if (y < minY) minY = y;
    if (y > maxY) maxY = y;
  }
  const cx = (minX + maxX) / 2;
  const cy = (minY + maxY) / 2;
  let hw = (maxX - minX) / 2;
  let hh = (maxY - minY) / 2;
  if (hw === 0 && hh === 0) {
    hw = hh = FALLBACK_HALF_EXTENT;
  }
  hw *= 1 + FOCUS_MARGIN;
  hh *= 1 + FOCUS_MARGIN;
  return { x0: cx - hw, y0: cy - hh, x1: cx + hw, y1: cy + hh };
}

/** Camera that fits the rect into a viewport, preserving aspect. */
export function cameraForRect(
  rect: FocusRect,
  viewWidth: number,
  viewHeight: number,
  worldPerPixel: number,
): Camera {
  const w = Math.max(rect.x1 - rect.x0, 1e-9);
  const h = Math.max(rect.y1 - rect.y0, 1e-9);
  const zoom = Math.min(
    (viewWidth * worldPerPixel) / w,
    (viewHeight * worldPerPixel) / h,
  );
  return {
    center: [(rect.x0 + rect.x1) / 2, (rect.y0 + rect.y1) / 2],
    zoom,
  };
}
