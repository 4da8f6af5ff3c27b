// Canvas drawing: points with uncertainty rings, movement paths with
// gradient colors, lasso outline, edge indicators and the mini-map.

import { ringColor } from "./colormap.js";
import { Vertex } from "./lasso.js";
import { Camera, Snapshot } from "./types.js";
import { EdgeIndicator, minimapVisible, Ranges } from "./view.js";

const GROUP_PALETTE = [
  "#4269d0", "#efb118", "#ff725c", "#6cc5b0", "#3ca951",
  "#ff8ab7", "#a463f2", "#97bbf5", "#9c6b4e", "#9498a0",
];

export interface Viewport {
  width: number;
  height: number;
  worldPerPixel: number; // at zoom 1
}

export function worldToScreen(
  p: [number, number],
  camera: Camera,
  vp: Viewport,
): [number, number] {
  const s = camera.zoom / vp.worldPerPixel;
  return [
    vp.width / 2 + (p[0] - camera.center[0]) * s,
    vp.height / 2 - (p[1] - camera.center[1]) * s, // y up in world space
  ];
}

export function visibleWorldRect(camera: Camera, vp: Viewport) {
  const hw = (vp.width / 2) * (vp.worldPerPixel / camera.zoom);
  const hh = (vp.height / 2) * (vp.worldPerPixel / camera.zoom);
  return {
    x0: camera.center[0] - hw,
    y0: camera.center[1] - hh,
    x1: camera.center[0] + hw,
    y1: camera.center[1] + hh,
  };
}

const groupColor = (group: string | undefined, palette: string[]) => {
  if (!group) return "#555";
  let h = 0;
  for (let i = 0; i < group.length; i++) h = (h * 31 + group.charCodeAt(i)) >>> 0;
  return palette[h % palette.length];
};

export interface DrawFlags {
  fadingIn?: Set<string>;
  fadingOut?: Set<string>;
  fade?: number; // 0..1 stage progress
  movedPositions?: Map<string, [number, number]>;
  selection?: Set<string>;
}

export function drawFrame(
  ctx: CanvasRenderingContext2D,
  snapshot: Snapshot,
  camera: Camera,
  vp: Viewport,
  flags: DrawFlags = {},
): void {
  ctx.clearRect(0, 0, vp.width, vp.height);

  // movement paths first, under the markers
  for (const [id, trail] of Object.entries(snapshot.trails)) {
    if (trail.length < 2) continue;
    for (let i = 1; i < trail.length; i++) {
      const [x0, y0, w0] = trail[i - 1];
      const [x1, y1, w1] = trail[i];
      const a = worldToScreen([x0, y0], camera, vp);
      const b = worldToScreen([x1, y1], camera, vp);
      const grad = ctx.createLinearGradient(a[0], a[1], b[0], b[1]);
      grad.addColorStop(0, ringColor(w0));
      grad.addColorStop(1, ringColor(w1));
      ctx.strokeStyle = grad;
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      ctx.moveTo(a[0], a[1]);
      ctx.lineTo(b[0], b[1]);
      ctx.stroke();
    }
    void id;
  }

  for (const [id, pos] of Object.entries(snapshot.positions)) {
    const shown = flags.movedPositions?.get(id) ?? pos;
    const [sx, sy] = worldToScreen(shown, camera, vp);
    let alpha = 1;
    if (flags.fadingIn?.has(id)) alpha = flags.fade ?? 1;
    if (flags.fadingOut?.has(id)) alpha = 1 - (flags.fade ?? 1);
    ctx.globalAlpha = alpha;

    const unc = snapshot.uncertainties[id];
    if (unc) {
      ctx.strokeStyle = ringColor(unc.w);
      ctx.lineWidth = 3;
      ctx.beginPath();
      ctx.arc(sx, sy, 7, 0, Math.PI * 2);
      ctx.stroke();
    }
    ctx.fillStyle = groupColor(snapshot.groups[id], GROUP_PALETTE);
    ctx.beginPath();
    ctx.arc(sx, sy, unc ? 3.5 : 3, 0, Math.PI * 2);
    ctx.fill();

    if (flags.selection?.has(id)) {
      ctx.strokeStyle = "#111";
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      ctx.arc(sx, sy, 10, 0, Math.PI * 2);
      ctx.stroke();
    }
    ctx.globalAlpha = 1;
  }
}

export function drawLasso(ctx: CanvasRenderingContext2D, polygon: Vertex[]): void {
  if (polygon.length < 2) return;
  ctx.strokeStyle = "#1a6baf";
  ctx.setLineDash([5, 4]);
  ctx.lineWidth = 1.2;
  ctx.beginPath();
  ctx.moveTo(polygon[0][0], polygon[0][1]);
  for (const [x, y] of polygon.slice(1)) ctx.lineTo(x, y);
  ctx.closePath();
  ctx.stroke();
  ctx.setLineDash([]);
}

export function drawEdgeIndicators(
  ctx: CanvasRenderingContext2D,
  indicators: EdgeIndicator[],
  camera: Camera,
  vp: Viewport,
): void {
  ctx.fillStyle = "#c33";
  for (const ind of indicators) {
    const [sx, sy] = worldToScreen([ind.x, ind.y], camera, vp);
    const a = -ind.angle; // screen y is flipped
    ctx.save();
    ctx.translate(
      Math.min(Math.max(sx, 8), vp.width - 8),
      Math.min(Math.max(sy, 8), vp.height - 8),
    );
    ctx.rotate(a);
    ctx.beginPath();
    ctx.moveTo(7, 0);
    ctx.lineTo(-4, 4.5);
    ctx.lineTo(-4, -4.5);
    ctx.closePath();
    ctx.fill();
    ctx.restore();
  }
}

export function drawMinimap(
  ctx: CanvasRenderingContext2D,
  snapshot: Snapshot,
  ranges: Ranges,
  camera: Camera,
  vp: Viewport,
): void {
  if (!minimapVisible(camera.zoom)) return;
  const size = 120;
  const pad = 10;
  const x = vp.width - size - pad;
  const y = vp.height - size - pad;

  ctx.fillStyle = "rgba(255,255,255,0.88)";
  ctx.strokeStyle = "#999";
  ctx.fillRect(x, y, size, size);
  ctx.strokeRect(x, y, size, size);

  const spanX = Math.max(ranges.x[1] - ranges.x[0], 1e-9);
  const spanY = Math.max(ranges.y[1] - ranges.y[0], 1e-9);
  const toMini = (p: [number, number]): [number, number] => [
    x + ((p[0] - ranges.x[0]) / spanX) * size,
    y + size - ((p[1] - ranges.y[0]) / spanY) * size,
  ];

  ctx.fillStyle = "#888";
  for (const pos of Object.values(snapshot.positions)) {
    const [mx, my] = toMini(pos);
    ctx.fillRect(mx - 1, my - 1, 2, 2);
  }

  const view = visibleWorldRect(camera, vp);
  const [vx0, vy1] = toMini([view.x0, view.y0]);
  const [vx1, vy0] = toMini([view.x1, view.y1]);
  ctx.strokeStyle = "#d22";
  ctx.strokeRect(
    Math.max(vx0, x),
    Math.max(vy0, y),
    Math.min(vx1 - vx0, size),
    Math.min(vy1 - vy0, size),
  );
}
