// Staged frame-to-frame animation schedules.
//
// A schedule is plain data: an ordered list of stages the render loop
// plays back to back, never overlapping.  Visual-structure changes run
// remove -> move -> add; when the camera also changes, view-level stages
// go first, with the order depending on the zoom direction: zooming in
// pans then zooms (the target is inside the current view), zooming out
// zooms then pans (make room first, then travel).

import { Camera, Snapshot, sameCamera } from "./types.js";

export type StageKind = "pan" | "zoom-in" | "zoom-out" | "remove" | "move" | "add";

export interface MoveSpec {
  id: string;
  from: [number, number];
  to: [number, number];
}

export interface Stage {
  kind: StageKind;
  duration: number;
  ids?: string[];
  moves?: MoveSpec[];
  from?: Camera;
  to?: Camera;
}

export interface ScheduleOptions {
  stageMs?: number;
  camera?: { from: Camera; to: Camera };
}

export const DEFAULT_STAGE_MS = 300;

function structureDiff(prev: Snapshot, next: Snapshot) {
  const removed: string[] = [];
  const added: string[] = [];
  const moves: MoveSpec[] = [];
  for (const id of Object.keys(prev.positions)) {
    if (!(id in next.positions)) removed.push(id);
  }
  for (const [id, to] of Object.entries(next.positions)) {
    const from = prev.positions[id];
    if (from === undefined) {
      added.push(id);
    } else if (from[0] !== to[0] || from[1] !== to[1]) {
      moves.push({ id, from: [from[0], from[1]], to: [to[0], to[1]] });
    }
  }
  return { removed, added, moves };
}

export function buildSchedule(
  prev: Snapshot | null,
  next: Snapshot,
  options: ScheduleOptions = {},
): Stage[] {
  const duration = options.stageMs ?? DEFAULT_STAGE_MS;
  const stages: Stage[] = [];

  if (prev === null) {
    // first frame: everything fades in at once
    const ids = Object.keys(next.positions);
    return ids.length ? [{ kind: "add", duration, ids }] : [];
  }

  const cam = options.camera;
  if (cam && !sameCamera(cam.from, cam.to)) {
    const pan: Stage = { kind: "pan", duration, from: cam.from, to: cam.to };
    const moved =
      cam.from.center[0] !== cam.to.center[0] ||
      cam.from.center[1] !== cam.to.center[1];
    if (cam.to.zoom > cam.from.zoom) {
      if (moved) stages.push(pan);
      stages.push({ kind: "zoom-in", duration, from: cam.from, to: cam.to });
    } else if (cam.to.zoom < cam.from.zoom) {
      stages.push({ kind: "zoom-out", duration, from: cam.from, to: cam.to });
      if (moved) stages.push(pan);
    } else {
      stages.push(pan);
    }
  }

  const { removed, added, moves } = structureDiff(prev, next);
  if (removed.length) stages.push({ kind: "remove", duration, ids: removed });
  if (moves.length) stages.push({ kind: "move", duration, moves });
  if (added.length) stages.push({ kind: "add", duration, ids: added });
  return stages;
}

export interface ActiveStage {
  stage: Stage;
  progress: number; // 0..1 within the stage
}

/**
 * Plays one schedule at a time against an external clock.
 *
 * Frames submitted while a schedule is running are coalesced: only the
 * newest waits, and it is scheduled against the frame that was actually
 * on screen when the queue drains, so fast producers cannot pile up
 * animations.
 */
export class TransitionPlayer {
  private stages: Stage[] = [];
  private index = 0;
  private stageStart = 0;
  private shown: Snapshot | null = null;
  private pending: Snapshot | null = null;
  private options: ScheduleOptions;
  cameraFor: (next: Snapshot) => ScheduleOptions["camera"] | undefined;

  constructor(options: ScheduleOptions = {}) {
    this.options = options;
    this.cameraFor = () => options.camera;
  }

  get busy(): boolean {
    return this.index < this.stages.length;
  }

  get current(): Snapshot | null {
    return this.shown;
  }

  /** Number of frames dropped by coalescing so far. */
  dropped = 0;

  submit(next: Snapshot, now: number): void {
    if (this.busy) {
      if (this.pending !== null) this.dropped += 1;
      this.pending = next; // coalesce: keep only the newest
      return;
    }
    this.start(next, now);
  }

  private start(next: Snapshot, now: number): void {
    this.stages = buildSchedule(this.shown, next, {
      ...this.options,
      camera: this.cameraFor(next),
    });
    this.index = 0;
    this.stageStart = now;
    this.shown = next;
  }

  /** Advance the clock; returns the stage to draw, or null when idle. */
  advance(now: number): ActiveStage | null {
    while (this.index < this.stages.length) {
      const stage = this.stages[this.index];
      const elapsed = now - this.stageStart;
      if (elapsed < stage.duration) {
        return { stage, progress: Math.max(0, elapsed / stage.duration) };
      }
      this.stageStart += stage.duration;
      this.index += 1;
    }
    if (this.pending !== null) {
      const next = this.pending;
      this.pending = null;
      this.start(next, now);
      return this.advance(now);
    }
    return null;
  }
}
