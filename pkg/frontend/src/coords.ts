/** Invertible affine mapping between canvas pixels and scan coordinates.
 *
 * Pixel (0, height-1) is the bottom-left corner and maps exactly to
 * (axis_x.start, axis_y.start); pixel (width-1, 0) maps exactly to
 * (axis_x.stop, axis_y.stop). The y axis is flipped so flux increases
 * upward, matching the physics convention for these plots.
 */

import type { AxisSpec } from "./api.js";

export interface Pixel {
  px: number;
  py: number;
}

export interface DataPoint {
  x: number;
  y: number;
}

export class CoordinateMap {
  constructor(
    readonly axisX: AxisSpec,
    readonly axisY: AxisSpec,
    readonly width: number,
    readonly height: number,
  ) {
    if (width < 2 || height < 2) {
      throw new Error("canvas must be at least 2x2 pixels");
    }
    if (axisX.stop === axisX.start || axisY.stop === axisY.start) {
      throw new Error("axis extent must be nonzero");
    }
  }

  dataToPixel(x: number, y: number): Pixel {
    const fx = (x - this.axisX.start) / (this.axisX.stop - this.axisX.start);
    const fy = (y - this.axisY.start) / (this.axisY.stop - this.axisY.start);
    return {
      px: fx * (this.width - 1),
      py: (1 - fy) * (this.height - 1),
    };
  }

  pixelToData(px: number, py: number): DataPoint {
    const fx = px / (this.width - 1);
    const fy = 1 - py / (this.height - 1);
    return {
      x: this.axisX.start + fx * (this.axisX.stop - this.axisX.start),
      y: this.axisY.start + fy * (this.axisY.stop - this.axisY.start),
    };
  }

  inExtent(x: number, y: number): boolean {
    const [x0, x1] = [
      Math.min(this.axisX.start, this.axisX.stop),
      Math.max(this.axisX.start, this.axisX.stop),
    ];
    const [y0, y1] = [
      Math.min(this.axisY.start, this.axisY.stop),
      Math.max(this.axisY.start, this.axisY.stop),
    ];
    return x >= x0 && x <= x1 && y >= y0 && y <= y1;
  }

  /** Nearest grid indices (ix along x, iy along y) for a data point. */
  nearestGridIndex(x: number, y: number): { ix: number; iy: number } {
    const fx = (x - this.axisX.start) / (this.axisX.stop - this.axisX.start);
    const fy = (y - this.axisY.start) / (this.axisY.stop - this.axisY.start);
    const clamp = (v: number, n: number) =>
      Math.min(n - 1, Math.max(0, Math.round(v * (n - 1))));
    return {
      ix: clamp(fx, this.axisX.n_points),
      iy: clamp(fy, this.axisY.n_points),
    };
  }
}

/** Evenly spaced round-valued tick positions covering an axis. */
export function axisTicks(axis: AxisSpec, maxTicks = 9): number[] {
  const span = Math.abs(axis.stop - axis.start);
  const rawStep = span / Math.max(1, maxTicks - 1);
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = mag;
  for (const mult of [1, 2, 2.5, 5, 10]) {
    if (mag * mult >= rawStep) {
      step = mag * mult;
      break;
    }
  }
  const lo = Math.min(axis.start, axis.stop);
  const hi = Math.max(axis.start, axis.stop);
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12; v += step) {
    // snap away float drift so labels read cleanly
    ticks.push(Number(v.toFixed(10)));
  }
  return ticks;
}
