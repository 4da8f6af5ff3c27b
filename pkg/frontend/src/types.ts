// Wire types for the /stream protocol plus shared view-side structures.

export interface UncertaintyInfo {
  l: number; // observed feature prefix width
  u: number; // strain
  v: number; // loading gap
  w: number; // combined
  beta: number;
}

export interface TransformInfo {
  scale: number;
  translation: number[];
  rotation: number[][];
}

export interface FocusRect {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export interface Completion {
  id: string;
  l: number;
  w: number;
  e: number;
}

export interface Snapshot {
  kind: "snapshot";
  seq: number;
  t: number;
  beta: number;
  stored: number;
  positions: Record<string, [number, number]>;
  uncertainties: Record<string, UncertaintyInfo>;
  trails: Record<string, [number, number, number][]>;
  groups: Record<string, string>;
  transform: TransformInfo;
  new_ids: string[];
  removed_ids: string[];
  completions: Completion[];
  focus?: FocusRect;
  config?: { dims: number; components: number; batch: number; forget: number };
}

export type TrackingMode = "off" | "new-points" | "selected-points" | "both";

export interface SelectMessage {
  kind: "select";
  seq: number;
  mode: TrackingMode;
  ids: string[];
}

export interface AckMessage {
  kind: "ack";
  seq: number;
  mode: TrackingMode;
  ids: string[];
}

export interface ErrorMessage {
  kind: "error";
  seq: number;
  message: string;
}

export type ServerMessage = Snapshot | AckMessage | ErrorMessage;

export interface Camera {
  center: [number, number];
  zoom: number;
}

export const sameCamera = (a: Camera, b: Camera) =>
  a.zoom === b.zoom && a.center[0] === b.center[0] && a.center[1] === b.center[1];
