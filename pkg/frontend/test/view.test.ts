import { describe, expect, it } from "vitest";

import { edgeIndicators, growRanges, minimapVisible, ViewState } from "../src/view.js";
import { snap } from "./helpers.js";

describe("axis ranges", () => {
  it("start from the first frame's extent", () => {
    const r = growRanges(null, snap(1, { a: [0, 0], b: [2, 4] }));
    expect(r).toEqual({ x: [0, 2], y: [0, 4] });
  });

  it("grow to include out-of-range estimates and never shrink", () => {
    let r = growRanges(null, snap(1, { a: [0, 0], b: [2, 4] }));
    r = growRanges(r, snap(2, { c: [-1, 1] })); // a and b are gone
    expect(r).toEqual({ x: [-1, 2], y: [0, 4] });
    r = growRanges(r, snap(3, { c: [0, 0] }));
    expect(r).toEqual({ x: [-1, 2], y: [0, 4] });
  });

  it("absorb only grows ranges outside tracking mode", () => {
    const view = new ViewState();
    view.absorb(snap(1, { a: [0, 0], b: [2, 4] }));
    expect(view.ranges).toEqual({ x: [0, 2], y: [0, 4] });
    view.mode = "selected-points";
    view.absorb(snap(2, { a: [9, 9], b: [2, 4] }));
    expect(view.ranges).toEqual({ x: [0, 2], y: [0, 4] });
  });

  it("absorb drops removed ids from the selection", () => {
    const view = new ViewState();
    view.selection = new Set(["a", "b"]);
    view.absorb(snap(1, { b: [0, 0] }, { removed_ids: ["a"] }));
    expect([...view.selection]).toEqual(["b"]);
  });
});

describe("edge indicators", () => {
  const visible = { x0: 0, y0: 0, x1: 10, y1: 10 };

  it("ignore points inside the view", () => {
    expect(edgeIndicators({ a: [5, 5], b: [0, 10] }, visible)).toEqual([]);
  });

  it("clamp outside points to the border and aim at them", () => {
    const out = edgeIndicators({ p: [15, 5], q: [5, -3] }, visible);
    expect(out).toHaveLength(2);
    const p = out.find((e) => e.id === "p")!;
    expect([p.x, p.y]).toEqual([10, 5]);
    expect(p.angle).toBeCloseTo(0, 12);
    const q = out.find((e) => e.id === "q")!;
    expect([q.x, q.y]).toEqual([5, 0]);
    expect(q.angle).toBeCloseTo(-Math.PI / 2, 12);
  });
});

describe("mini-map visibility", () => {
  it("shows whenever zoom is not 1", () => {
    expect(minimapVisible(1)).toBe(false);
    expect(minimapVisible(2)).toBe(true);
    expect(minimapVisible(0.5)).toBe(true);
  });
});
