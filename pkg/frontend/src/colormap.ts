// Red sequential colormap for the combined uncertainty W: 0 draws an
// unsaturated near-white ring, 1 a fully saturated red.  Movement paths
// interpolate along the same ramp between their endpoint W values.

const LOW: [number, number, number] = [255, 245, 240];
const HIGH: [number, number, number] = [165, 15, 21];

const clamp01 = (w: number) => (w < 0 ? 0 : w > 1 ? 1 : w);

export function ringRgb(w: number): [number, number, number] {
  const t = clamp01(w);
  return [
    Math.round(LOW[0] + (HIGH[0] - LOW[0]) * t),
    Math.round(LOW[1] + (HIGH[1] - LOW[1]) * t),
    Math.round(LOW[2] + (HIGH[2] - LOW[2]) * t),
  ];
}

export function ringColor(w: number): string {
  const [r, g, b] = ringRgb(w);
  return `rgb(${r},${g},${b})`;
}

/** HSV saturation of the ramp at w; monotone in w by construction. */
export function saturationOf(w: number): number {
  // unrounded channels, so the monotonicity is exact
  const t = clamp01(w);
  const r = LOW[0] + (HIGH[0] - LOW[0]) * t;
  const g = LOW[1] + (HIGH[1] - LOW[1]) * t;
  const b = LOW[2] + (HIGH[2] - LOW[2]) * t;
  const max = Math.max(r, g, b);
  return max === 0 ? 0 : (max - Math.min(r, g, b)) / max;
}

/** Color of a path segment at fraction t between endpoint uncertainties. */
export function segmentColor(w0: number, w1: number, t: number): string {
  return ringColor(clamp01(w0) + (clamp01(w1) - clamp01(w0)) * clamp01(t));
}
