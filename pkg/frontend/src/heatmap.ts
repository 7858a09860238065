/** Deterministic heatmap rasterization.
 *
 * The scan grid is rendered into an RGBA byte buffer with nearest-neighbor
 * sampling, one function of the input scan and nothing else, so rendering
 * the same scan twice yields identical bytes. DOM glue (canvas blitting,
 * marker overlay, hover readout) lives in main.ts.
 */

import type { ScanData } from "./api.js";
import { colormap } from "./colormap.js";
import { CoordinateMap } from "./coords.js";

export interface RenderedHeatmap {
  width: number;
  height: number;
  /** RGBA, row-major from the top-left canvas pixel. */
  pixels: Uint8ClampedArray<ArrayBuffer>;
  map: CoordinateMap;
}

/** Integer pixels per grid cell; the canvas is sized to the grid. */
export const DEFAULT_CELL_PX = 4;

export function renderHeatmap(
  data: ScanData,
  cellPx = DEFAULT_CELL_PX,
): RenderedHeatmap {
  const nx = data.axis_x.n_points;
  const ny = data.axis_y.n_points;
  const width = nx * cellPx;
  const height = ny * cellPx;
  const pixels = new Uint8ClampedArray(width * height * 4);

  for (let row = 0; row < height; row++) {
    // canvas row 0 is the top; grid row 0 is the bottom (y start)
    const iy = ny - 1 - Math.min(ny - 1, Math.floor(row / cellPx));
    const gridRow = data.values[iy];
    for (let col = 0; col < width; col++) {
      const ix = Math.min(nx - 1, Math.floor(col / cellPx));
      const [r, g, b] = colormap(gridRow[ix]);
      const o = (row * width + col) * 4;
      pixels[o] = r;
      pixels[o + 1] = g;
      pixels[o + 2] = b;
      pixels[o + 3] = 255;
    }
  }

  return {
    width,
    height,
    pixels,
    map: new CoordinateMap(data.axis_x, data.axis_y, width, height),
  };
}

export interface HoverReadout {
  x: number;
  y: number;
  transmission: number;
}

/** The (flux x, flux y, transmission) triple shown for a hovered pixel. */
export function hoverReadout(
  data: ScanData,
  rendered: RenderedHeatmap,
  px: number,
  py: number,
): HoverReadout {
  const { x, y } = rendered.map.pixelToData(px, py);
  const { ix, iy } = rendered.map.nearestGridIndex(x, y);
  return { x, y, transmission: data.values[iy][ix] };
}
