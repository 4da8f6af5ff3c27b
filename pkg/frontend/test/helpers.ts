import { Snapshot } from "../src/types.js";

export const snap = (
  seq: number,
  positions: Record<string, [number, number]>,
  extra: Partial<Snapshot> = {},
): Snapshot => ({
  kind: "snapshot",
  seq,
  t: seq,
  beta: 0.5,
  stored: Object.keys(positions).length,
  positions,
  uncertainties: {},
  trails: {},
  groups: {},
  transform: { scale: 1, translation: [0, 0], rotation: [[1, 0], [0, 1]] },
  new_ids: [],
  removed_ids: [],
  completions: [],
  ...extra,
});
