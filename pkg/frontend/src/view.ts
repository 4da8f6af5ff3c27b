// View-level state: camera, selection, tracking mode, axis ranges.

import { Camera, Snapshot, TrackingMode } from "./types.js";

export interface Ranges {
  x: [number, number];
  y: [number, number];
}

/**
 * Outside tracking mode the axes only ever grow: a new estimate landing
 * off-scale widens the range instead of rescaling what the user watches,
 * and the caller draws an edge indicator for it until the range catches
 * up visually.
 */
export function growRanges(current: Ranges | null, snapshot: Snapshot): Ranges {
  let [x0, x1] = current ? current.x : [Infinity, -Infinity];
  let [y0, y1] = current ? current.y : [Infinity, -Infinity];
  for (const [x, y] of Object.values(snapshot.positions)) {
    if (x < x0) x0 = x;
    if (x > x1) x1 = x;
    if (y < y0) y0 = y;
    if (y > y1) y1 = y;
  }
  if (x0 > x1) return { x: [-1, 1], y: [-1, 1] }; // empty frame
  return { x: [x0, x1], y: [y0, y1] };
}

export interface EdgeIndicator {
  id: string;
  x: number; // position clamped to the visible rect
  y: number;
  angle: number; // direction toward the real position, radians
}

/** Points outside the visible world rect, clamped to its border. */
export function edgeIndicators(
  positions: Record<string, [number, number]>,
  visible: { x0: number; y0: number; x1: number; y1: number },
): EdgeIndicator[] {
  const out: EdgeIndicator[] = [];
  for (const [id, [x, y]] of Object.entries(positions)) {
    if (x >= visible.x0 && x <= visible.x1 && y >= visible.y0 && y <= visible.y1) {
      continue;
    }
    const cx = Math.min(Math.max(x, visible.x0), visible.x1);
    const cy = Math.min(Math.max(y, visible.y0), visible.y1);
    out.push({ id, x: cx, y: cy, angle: Math.atan2(y - cy, x - cx) });
  }
  return out;
}

export const minimapVisible = (zoom: number) => zoom !== 1;

export class ViewState {
  camera: Camera = { center: [0, 0], zoom: 1 };
  selection = new Set<string>();
  mode: TrackingMode = "off";
  ranges: Ranges | null = null;

  absorb(snapshot: Snapshot): void {
    if (this.mode === "off") {
      this.ranges = growRanges(this.ranges, snapshot);
    }
    for (const id of snapshot.removed_ids) this.selection.delete(id);
  }
}
