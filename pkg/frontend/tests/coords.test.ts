import { describe, expect, it } from "vitest";

import type { AxisSpec } from "../src/api.js";
import { CoordinateMap, axisTicks } from "../src/coords.js";

const ax: AxisSpec = { label: "X0", start: -2, stop: 2, n_points: 121 };
const ay: AxisSpec = { label: "Z0", start: -1, stop: 3, n_points: 81 };

describe("CoordinateMap", () => {
  const map = new CoordinateMap(ax, ay, 484, 324);

  it("maps corner pixels to axis extremes exactly", () => {
    // bottom-left canvas pixel = (start, start)
    const bl = map.pixelToData(0, 323);
    expect(bl.x).toBe(-2);
    expect(bl.y).toBe(-1);
    // top-right canvas pixel = (stop, stop)
    const tr = map.pixelToData(483, 0);
    expect(tr.x).toBe(2);
    expect(tr.y).toBe(3);
  });

  it("is invertible at float precision", () => {
    for (const [x, y] of [
      [-2, -1],
      [0.123, 1.456],
      [1.999, 2.999],
      [-1.5, 0],
    ]) {
      const { px, py } = map.dataToPixel(x, y);
      const back = map.pixelToData(px, py);
      expect(back.x).toBeCloseTo(x, 12);
      expect(back.y).toBeCloseTo(y, 12);
    }
  });

  it("round-trips a rounded click to within one pixel", () => {
    for (const [x, y] of [
      [0.37, 0.81],
      [-1.02, 2.4],
      [1.5, -0.5],
    ]) {
      const p = map.dataToPixel(x, y);
      const clicked = map.pixelToData(Math.round(p.px), Math.round(p.py));
      const p2 = map.dataToPixel(clicked.x, clicked.y);
      expect(Math.abs(p2.px - p.px)).toBeLessThanOrEqual(1);
      expect(Math.abs(p2.py - p.py)).toBeLessThanOrEqual(1);
    }
  });

  it("classifies points against the scan extent", () => {
    expect(map.inExtent(0, 0)).toBe(true);
    expect(map.inExtent(-2, -1)).toBe(true);
    expect(map.inExtent(2.01, 0)).toBe(false);
    expect(map.inExtent(0, 3.2)).toBe(false);
  });

  it("finds the nearest grid index, clamped to the grid", () => {
    expect(map.nearestGridIndex(-2, -1)).toEqual({ ix: 0, iy: 0 });
    expect(map.nearestGridIndex(2, 3)).toEqual({ ix: 120, iy: 80 });
    expect(map.nearestGridIndex(0, 1)).toEqual({ ix: 60, iy: 40 });
    expect(map.nearestGridIndex(9, 9)).toEqual({ ix: 120, iy: 80 });
  });

  it("rejects degenerate construction", () => {
    expect(() => new CoordinateMap(ax, ay, 1, 100)).toThrow();
    const flat = { ...ay, stop: ay.start };
    expect(() => new CoordinateMap(ax, flat, 100, 100)).toThrow();
  });
});

describe("axisTicks", () => {
  it("covers the extent with round values", () => {
    const ticks = axisTicks(ax);
    expect(ticks[0]).toBeGreaterThanOrEqual(-2);
    expect(ticks[ticks.length - 1]).toBeLessThanOrEqual(2);
    expect(ticks).toContain(0);
    expect(ticks.length).toBeGreaterThanOrEqual(4);
    expect(ticks.length).toBeLessThanOrEqual(10);
  });

  it("produces strictly increasing ticks", () => {
    const ticks = axisTicks(ay);
    for (let i = 1; i < ticks.length; i++) {
      expect(ticks[i]).toBeGreaterThan(ticks[i - 1]);
    }
  });
});
