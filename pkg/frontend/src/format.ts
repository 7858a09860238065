/** Display formatting. All numerics shown in the console pass through
 * here; the underlying payload values are never mutated.
 */

/** Format to a fixed number of significant figures (default 4). */
export function formatSig(value: number, digits = 4): string {
  if (!Number.isFinite(value)) return String(value);
  if (value === 0) return "0";
  return String(Number(value.toPrecision(digits)));
}

/** Format a 2x2 matrix row-wise, entries at display precision. */
export function formatMatrix(m: number[][], digits = 4): string {
  return m
    .map((row) => `[${row.map((v) => formatSig(v, digits)).join(", ")}]`)
    .join(" ");
}
