/** Color scale for transmission heatmaps.
 *
 * Piecewise-linear approximation of the perceptually uniform "viridis"
 * ramp: value 0 (full notch, resonator pulled onto the probe) renders dark
 * violet, value 1 (full transmission) renders bright yellow. Inputs are
 * clamped to [0, 1].
 */

const STOPS: Array<[number, number, number]> = [
  [68, 1, 84],
  [71, 44, 122],
  [59, 81, 139],
  [44, 113, 142],
  [33, 144, 141],
  [39, 173, 129],
  [92, 200, 99],
  [170, 220, 50],
  [253, 231, 37],
];

export function colormap(value: number): [number, number, number] {
  const v = Math.min(1, Math.max(0, value));
  const pos = v * (STOPS.length - 1);
  const i = Math.min(STOPS.length - 2, Math.floor(pos));
  const frac = pos - i;
  const a = STOPS[i];
  const b = STOPS[i + 1];
  return [
    Math.round(a[0] + frac * (b[0] - a[0])),
    Math.round(a[1] + frac * (b[1] - a[1])),
    Math.round(a[2] + frac * (b[2] - a[2])),
  ];
}
