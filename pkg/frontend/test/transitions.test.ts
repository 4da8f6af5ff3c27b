import { describe, expect, it } from "vitest";

import {
  buildSchedule,
  DEFAULT_STAGE_MS,
  TransitionPlayer,
} from "../src/transitions.js";
import { Camera } from "../src/types.js";
import { snap } from "./helpers.js";

const kinds = (stages: { kind: string }[]) => stages.map((s) => s.kind);

describe("buildSchedule structure stages", () => {
  it("orders remove, move, add", () => {
    const prev = snap(1, { a: [0, 0], b: [1, 1], c: [2, 2] });
    const next = snap(2, { b: [1.5, 1], c: [2, 2], d: [3, 3] });
    const stages = buildSchedule(prev, next);
    expect(kinds(stages)).toEqual(["remove", "move", "add"]);
    expect(stages[0].ids).toEqual(["a"]);
    expect(stages[1].moves).toEqual([{ id: "b", from: [1, 1], to: [1.5, 1] }]);
    expect(stages[2].ids).toEqual(["d"]);
  });

  it("emits an empty schedule for identical snapshots", () => {
    const prev = snap(1, { a: [0, 0], b: [1, 1] });
    const next = snap(2, { a: [0, 0], b: [1, 1] });
    expect(buildSchedule(prev, next)).toEqual([]);
  });

  it("skips empty stages", () => {
    const prev = snap(1, { a: [0, 0] });
    const next = snap(2, { a: [0.5, 0] });
    expect(kinds(buildSchedule(prev, next))).toEqual(["move"]);
  });

  it("fades everything in on the first frame", () => {
    const stages = buildSchedule(null, snap(1, { a: [0, 0], b: [1, 1] }));
    expect(kinds(stages)).toEqual(["add"]);
    expect(stages[0].ids).toEqual(["a", "b"]);
  });

  it("uses 300 ms stages by default, configurable", () => {
    const prev = snap(1, { a: [0, 0] });
    const next = snap(2, { b: [1, 1] });
    for (const stage of buildSchedule(prev, next)) {
      expect(stage.duration).toBe(DEFAULT_STAGE_MS);
      expect(stage.duration).toBe(300);
    }
    for (const stage of buildSchedule(prev, next, { stageMs: 120 })) {
      expect(stage.duration).toBe(120);
    }
  });
});

describe("buildSchedule camera stages", () => {
  const prev = snap(1, { a: [0, 0], b: [1, 1], c: [2, 2] });
  const next = snap(2, { b: [1.5, 1], c: [2, 2], d: [3, 3] });
  const from: Camera = { center: [0, 0], zoom: 1 };

  it("zooming in pans first, then zooms, then restructures", () => {
    const to: Camera = { center: [2, 1], zoom: 2 };
    const stages = buildSchedule(prev, next, { camera: { from, to } });
    expect(kinds(stages)).toEqual(["pan", "zoom-in", "remove", "move", "add"]);
  });

  it("zooming out zooms first, then pans, then restructures", () => {
    const to: Camera = { center: [2, 1], zoom: 0.5 };
    const stages = buildSchedule(prev, next, { camera: { from, to } });
    expect(kinds(stages)).toEqual(["zoom-out", "pan", "remove", "move", "add"]);
  });

  it("pure pan emits a single view stage", () => {
    const to: Camera = { center: [2, 1], zoom: 1 };
    const stages = buildSchedule(prev, next, { camera: { from, to } });
    expect(kinds(stages)).toEqual(["pan", "remove", "move", "add"]);
  });

  it("an unchanged camera adds no view stages", () => {
    const stages = buildSchedule(prev, next, { camera: { from, to: from } });
    expect(kinds(stages)).toEqual(["remove", "move", "add"]);
  });
});

describe("TransitionPlayer", () => {
  it("plays stages sequentially without overlap", () => {
    const player = new TransitionPlayer();
    player.submit(snap(1, { a: [0, 0], b: [1, 1] }), 0);
    player.submit(snap(2, { b: [2, 1], c: [3, 3] }), 0); // coalesces? no: busy
    // first schedule: initial add, 300 ms
    expect(player.advance(10)?.stage.kind).toBe("add");
    expect(player.advance(299)?.stage.kind).toBe("add");
    // drains into the second schedule: remove a, move b, add c
    expect(player.advance(300)?.stage.kind).toBe("remove");
    expect(player.advance(650)?.stage.kind).toBe("move");
    const active = player.advance(750);
    expect(active?.stage.kind).toBe("move");
    expect(active?.progress).toBeCloseTo(0.5, 5);
    expect(player.advance(950)?.stage.kind).toBe("add");
    expect(player.advance(1300)).toBeNull();
    expect(player.busy).toBe(false);
  });

  it("coalesces bursts to the newest frame", () => {
    const player = new TransitionPlayer();
    player.submit(snap(1, { a: [0, 0] }), 0);
    player.advance(10);
    player.submit(snap(2, { a: [1, 0] }), 20);
    player.submit(snap(3, { a: [2, 0] }), 30);
    player.submit(snap(4, { a: [3, 0], b: [1, 1] }), 40);
    expect(player.dropped).toBe(2); // frames 2 and 3 never play
    const active = player.advance(320);
    expect(player.current?.seq).toBe(4);
    // schedule built against what was on screen: a moved 0->3, b added
    expect(active?.stage.kind).toBe("move");
    expect(active?.stage.moves).toEqual([{ id: "a", from: [0, 0], to: [3, 0] }]);
    expect(player.advance(700)?.stage.kind).toBe("add");
  });

  it("an identical follow-up frame leaves the player idle", () => {
    const player = new TransitionPlayer();
    player.submit(snap(1, { a: [0, 0] }), 0);
    player.advance(1000);
    player.submit(snap(2, { a: [0, 0] }), 1001);
    expect(player.busy).toBe(false);
    expect(player.advance(1002)).toBeNull();
    expect(player.current?.seq).toBe(2);
  });
});
