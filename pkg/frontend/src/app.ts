// Application wiring: stream connection, transition playback, lasso
// interaction with the tracking-mode dialog, camera tracking.

import { StreamClient } from "./connection.js";
import { cameraForRect } from "./focus.js";
import { lassoSelect, Vertex } from "./lasso.js";
import {
  drawEdgeIndicators,
  drawFrame,
  drawLasso,
  drawMinimap,
  DrawFlags,
  visibleWorldRect,
  Viewport,
  worldToScreen,
} from "./renderer.js";
import { ActiveStage, TransitionPlayer } from "./transitions.js";
import { Camera, Snapshot, TrackingMode } from "./types.js";
import { edgeIndicators, ViewState } from "./view.js";

function lerpCamera(from: Camera, to: Camera, t: number): Camera {
  return {
    center: [
      from.center[0] + (to.center[0] - from.center[0]) * t,
      from.center[1] + (to.center[1] - from.center[1]) * t,
    ],
    zoom: from.zoom + (to.zoom - from.zoom) * t,
  };
}

function stageFlags(active: ActiveStage | null, view: ViewState): DrawFlags {
  const flags: DrawFlags = { selection: view.selection };
  if (!active) return flags;
  const { stage, progress } = active;
  if (stage.kind === "add" && stage.ids) {
    flags.fadingIn = new Set(stage.ids);
    flags.fade = progress;
  } else if (stage.kind === "remove" && stage.ids) {
    flags.fadingOut = new Set(stage.ids);
    flags.fade = progress;
  } else if (stage.kind === "move" && stage.moves) {
    flags.movedPositions = new Map(
      stage.moves.map((m) => [
        m.id,
        [
          m.from[0] + (m.to[0] - m.from[0]) * progress,
          m.from[1] + (m.to[1] - m.from[1]) * progress,
        ] as [number, number],
      ]),
    );
  } else if ((stage.kind === "pan" || stage.kind.startsWith("zoom")) && stage.from && stage.to) {
    view.camera = lerpCamera(stage.from, stage.to, progress);
  }
  return flags;
}

function showDialog(
  dialog: HTMLElement,
  ids: string[],
  choose: (mode: TrackingMode) => void,
): void {
  dialog.innerHTML = "";
  const label = document.createElement("div");
  label.textContent = `${ids.length} point(s) selected - track:`;
  dialog.appendChild(label);
  for (const mode of ["new-points", "selected-points", "both"] as TrackingMode[]) {
    const btn = document.createElement("button");
    btn.textContent = mode;
    btn.onclick = () => {
      dialog.style.display = "none";
      choose(mode);
    };
    dialog.appendChild(btn);
  }
  const off = document.createElement("button");
  off.textContent = "clear";
  off.onclick = () => {
    dialog.style.display = "none";
    choose("off");
  };
  dialog.appendChild(off);
  dialog.style.display = "block";
}

export function start(): void {
  const canvas = document.getElementById("view") as HTMLCanvasElement;
  const dialog = document.getElementById("dialog") as HTMLElement;
  const status = document.getElementById("status") as HTMLElement;
  const ctx = canvas.getContext("2d")!;

  const vp: Viewport = {
    width: canvas.width,
    height: canvas.height,
    worldPerPixel: 0.01,
  };
  const view = new ViewState();
  const player = new TransitionPlayer();
  let latest: Snapshot | null = null;
  let lasso: Vertex[] = [];
  let drawing = false;

  player.cameraFor = (next) => {
    if (view.mode === "off" || !next.focus) return undefined;
    const to = cameraForRect(next.focus, vp.width, vp.height, vp.worldPerPixel);
    return { from: { ...view.camera, center: [...view.camera.center] }, to };
  };

  const client = StreamClient.connect({
    onSnapshot: (snapshot) => {
      latest = snapshot;
      view.absorb(snapshot);
      player.submit(snapshot, performance.now());
      status.textContent =
        `frame ${snapshot.seq} | ${snapshot.stored} stored, ` +
        `${Object.keys(snapshot.uncertainties).length} partial | ` +
        `beta ${snapshot.beta.toFixed(2)}` +
        (player.dropped ? ` | ${player.dropped} frames coalesced` : "");
    },
    onAck: (_seq, mode, ids) => {
      view.mode = mode;
      view.selection = new Set(ids);
    },
    onError: (message) => {
      status.textContent = `server: ${message}`;
    },
    onClose: () => {
      status.textContent = "disconnected";
    },
  });

  canvas.addEventListener("pointerdown", (ev) => {
    drawing = true;
    lasso = [[ev.offsetX, ev.offsetY]];
  });
  canvas.addEventListener("pointermove", (ev) => {
    if (drawing) lasso.push([ev.offsetX, ev.offsetY]);
  });
  canvas.addEventListener("pointerup", () => {
    drawing = false;
    const shown = player.current;
    if (!shown) return;
    const screen: Record<string, [number, number]> = {};
    for (const [id, pos] of Object.entries(shown.positions)) {
      screen[id] = worldToScreen(pos, view.camera, vp);
    }
    const ids = lassoSelect(screen, lasso);
    lasso = [];
    if (ids.length === 0) return; // empty selection: no dialog
    showDialog(dialog, ids, (mode) => {
      client.select(mode, mode === "off" ? [] : ids);
    });
  });

  const loop = () => {
    const active = player.advance(performance.now());
    const shown = player.current;
    if (shown) {
      const flags = stageFlags(active, view);
      drawFrame(ctx, shown, view.camera, vp, flags);
      const visible = visibleWorldRect(view.camera, vp);
      if (view.mode === "off") {
        drawEdgeIndicators(
          ctx, edgeIndicators(shown.positions, visible), view.camera, vp,
        );
      }
      if (view.ranges) drawMinimap(ctx, shown, view.ranges, view.camera, vp);
      drawLasso(ctx, lasso);
    }
    void latest;
    requestAnimationFrame(loop);
  };
  requestAnimationFrame(loop);
}

if (typeof document !== "undefined" && document.getElementById("view")) {
  start();
}
