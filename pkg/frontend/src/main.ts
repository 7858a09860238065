/** Browser wiring for the calibration console.
 *
 * Pure logic (state transitions, coordinate math, rasterization,
 * formatting) lives in the sibling modules; this file only moves data
 * between them, the DOM, and the REST client.
 */

import { ApiError, ConsoleApi } from "./api.js";
import type { ScanData } from "./api.js";
import { axisTicks } from "./coords.js";
import { formatMatrix, formatSig } from "./format.js";
import { renderHeatmap, hoverReadout } from "./heatmap.js";
import type { RenderedHeatmap } from "./heatmap.js";
import * as st from "./state.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const baseUrlInput = $<HTMLInputElement>("base-url");
const seedInput = $<HTMLInputElement>("seed");
const crosstalkInput = $<HTMLInputElement>("crosstalk");
const newSessionBtn = $<HTMLButtonElement>("new-session");
const scanBtn = $<HTMLButtonElement>("scan");
const fitBtn = $<HTMLButtonElement>("fit");
const applyBtn = $<HTMLButtonElement>("apply-rescan");
const toggleBtn = $<HTMLButtonElement>("toggle-view");
const verifyBtn = $<HTMLButtonElement>("verify");
const clearBtn = $<HTMLButtonElement>("clear-centers");
const canvas = $<HTMLCanvasElement>("heatmap");
const overlay = $<HTMLCanvasElement>("overlay");
const sessionLine = $<HTMLElement>("session-line");
const hoverLine = $<HTMLElement>("hover-line");
const fitLine = $<HTMLElement>("fit-line");
const verifyLine = $<HTMLElement>("verify-line");
const bannerEl = $<HTMLElement>("banner");

let state = st.initialState();
let api = new ConsoleApi(baseUrlInput.value);
let rendered: RenderedHeatmap | null = null;
let dragIndex: number | null = null;
let downAt: { px: number; py: number } | null = null;

baseUrlInput.addEventListener("change", () => {
  api = new ConsoleApi(baseUrlInput.value);
});

function setState(next: st.ConsoleState): void {
  state = next;
  redraw();
}

function surface(err: unknown): void {
  const detail =
    err instanceof ApiError ? err.detail : err instanceof Error ? err.message : String(err);
  setState({ ...state, scanInFlight: false, banner: detail });
}

const MARGIN = 24; // room for tick labels around the data area

function redraw(): void {
  bannerEl.textContent = state.banner ?? "";
  bannerEl.style.display = state.banner ? "block" : "none";

  sessionLine.textContent = state.sessionId
    ? `session ${state.sessionId}` +
      (state.correctionApplied ? " | correction active" : "") +
      (state.scanInFlight ? " | scan running..." : "")
    : "no session";

  const view = st.currentView(state);
  const ctx = canvas.getContext("2d");
  const octx = overlay.getContext("2d");
  if (!ctx || !octx) return;

  if (!view) {
    rendered = null;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    octx.clearRect(0, 0, overlay.width, overlay.height);
  } else {
    rendered = renderHeatmap(view);
    canvas.width = rendered.width;
    canvas.height = rendered.height;
    overlay.width = rendered.width + 2 * MARGIN;
    overlay.height = rendered.height + 2 * MARGIN;
    canvas.style.margin = `${MARGIN}px`;
    ctx.putImageData(
      new ImageData(rendered.pixels, rendered.width, rendered.height),
      0,
      0,
    );
    drawOverlay(octx, view, rendered);
  }

  const elig = st.submitEligibility(state);
  fitBtn.disabled = !elig.enabled;
  fitBtn.title = elig.reason ?? "";
  scanBtn.disabled = !state.sessionId || state.scanInFlight;
  applyBtn.disabled = !state.fitSummary;
  toggleBtn.disabled = !state.after;
  toggleBtn.textContent = state.showAfter ? "show before" : "show after";
  verifyBtn.disabled = !state.correctionApplied;

  if (state.fitSummary) {
    const f = state.fitSummary.fit;
    const c = state.fitSummary.correction;
    fitLine.textContent =
      `fit (${f.center_source}, ${f.n_centers_used} centers): ` +
      `T = ${formatMatrix(c.T)}, offset = [${c.offset
        .map((v) => formatSig(v))
        .join(", ")}], residual rms = ${formatSig(f.residual_rms)}`;
  } else {
    fitLine.textContent = "";
  }
}

function drawOverlay(
  octx: CanvasRenderingContext2D,
  view: ScanData,
  r: RenderedHeatmap,
): void {
  octx.clearRect(0, 0, overlay.width, overlay.height);
  octx.font = "11px sans-serif";
  octx.fillStyle = "#222";
  octx.strokeStyle = "#222";

  const unit = view.corrected ? "lattice units" : "Φ0";
  for (const t of axisTicks(view.axis_x)) {
    const { px } = r.map.dataToPixel(t, view.axis_y.start);
    octx.fillText(String(t), MARGIN + px - 8, MARGIN + r.height + 14);
  }
  for (const t of axisTicks(view.axis_y)) {
    const { py } = r.map.dataToPixel(view.axis_x.start, t);
    octx.fillText(String(t), 2, MARGIN + py + 4);
  }
  octx.fillText(
    `${view.axis_x.label} / ${view.axis_y.label} [${unit}]` +
      (view.corrected ? " (corrected)" : " (uncorrected)"),
    MARGIN,
    14,
  );

  // clicked centers as draggable crosshairs
  octx.strokeStyle = "#ff3333";
  octx.fillStyle = "#ff3333";
  state.centers.forEach((c, i) => {
    const { px, py } = r.map.dataToPixel(c.x, c.y);
    const cx = MARGIN + px;
    const cy = MARGIN + py;
    octx.beginPath();
    octx.moveTo(cx - 6, cy);
    octx.lineTo(cx + 6, cy);
    octx.moveTo(cx, cy - 6);
    octx.lineTo(cx, cy + 6);
    octx.stroke();
    const tag = c.index ? `(${c.index[0]},${c.index[1]})` : String(i + 1);
    octx.fillText(tag, cx + 7, cy - 7);
  });
}

function pixelFromEvent(ev: MouseEvent): { px: number; py: number } {
  const rect = overlay.getBoundingClientRect();
  return {
    px: ev.clientX - rect.left - MARGIN,
    py: ev.clientY - rect.top - MARGIN,
  };
}

overlay.addEventListener("mousedown", (ev) => {
  if (!rendered) return;
  const { px, py } = pixelFromEvent(ev);
  downAt = { px, py };
  dragIndex = null;
  state.centers.forEach((c, i) => {
    const p = rendered!.map.dataToPixel(c.x, c.y);
    if (Math.hypot(p.px - px, p.py - py) < 8) dragIndex = i;
  });
});

overlay.addEventListener("mousemove", (ev) => {
  if (!rendered) return;
  const { px, py } = pixelFromEvent(ev);
  const view = st.currentView(state);
  if (view && px >= 0 && py >= 0 && px < rendered.width && py < rendered.height) {
    const h = hoverReadout(view, rendered, px, py);
    hoverLine.textContent =
      `${view.axis_x.label} = ${formatSig(h.x)}, ` +
      `${view.axis_y.label} = ${formatSig(h.y)}, ` +
      `transmission = ${formatSig(h.transmission)}`;
  }
  if (dragIndex !== null) {
    const { x, y } = rendered.map.pixelToData(px, py);
    setState(st.moveCenter(state, dragIndex, x, y));
  }
});

overlay.addEventListener("mouseup", (ev) => {
  if (!rendered || !downAt) return;
  const { px, py } = pixelFromEvent(ev);
  const moved = Math.hypot(px - downAt.px, py - downAt.py);
  if (dragIndex === null && moved < 3) {
    const { x, y } = rendered.map.pixelToData(px, py);
    setState(st.addCenter(state, x, y));
  }
  dragIndex = null;
  downAt = null;
});

newSessionBtn.addEventListener("click", async () => {
  try {
    const resp = await api.createSession({
      n_qubits: 1,
      crosstalk_fraction: Number(crosstalkInput.value),
      random_offsets: true,
      seed: Number(seedInput.value),
    });
    setState(st.sessionAttached(resp.summary.session_id));
  } catch (err) {
    surface(err);
  }
});

async function runScan(useCorrection: boolean): Promise<void> {
  if (!state.sessionId || state.scanInFlight) return;
  const sid = state.sessionId;
  setState(st.scanRequested(state));
  try {
    const job = await api.startScan(sid, { use_correction: useCorrection });
    const done = await api.waitForScan(sid, job.scan_id, { timeoutMs: 120_000 });
    if (done.status !== "done") {
      setState(st.scanFailed(state, done.error ?? `scan ${done.status}`));
      return;
    }
    const { data } = await api.scanData(sid, job.scan_id);
    setState(st.scanFinished(state, data));
    lastScanId = job.scan_id;
  } catch (err) {
    surface(err);
  }
}

let lastScanId: string | null = null;

scanBtn.addEventListener("click", () => void runScan(false));

fitBtn.addEventListener("click", async () => {
  if (!state.sessionId || !lastScanId) return;
  try {
    const resp = await api.fit(state.sessionId, {
      scan_id: lastScanId,
      centers: state.centers.map((c) => [c.x, c.y]),
    });
    let next = st.fitSucceeded(state, resp.fit, resp.correction);
    // adopt the server's index proposals as tags on the clicked markers
    resp.indexed_centers.forEach((ic) => {
      const j = next.centers.findIndex(
        (c) =>
          Math.abs(c.x - ic.center[0]) < 1e-9 &&
          Math.abs(c.y - ic.center[1]) < 1e-9,
      );
      if (j >= 0) {
        next = st.setCenterIndex(next, j, [ic.index[0], ic.index[1]]);
      }
    });
    setState(next);
  } catch (err) {
    if (err instanceof ApiError) {
      setState(st.fitRejected(state, err.detail));
    } else {
      surface(err);
    }
  }
});

applyBtn.addEventListener("click", async () => {
  if (!state.sessionId || !state.fitSummary) return;
  try {
    await api.applyCorrection(state.sessionId, state.fitSummary.correction);
    setState(st.correctionApplied(state));
    await runScan(true);
  } catch (err) {
    surface(err);
  }
});

toggleBtn.addEventListener("click", () => setState(st.toggleView(state)));

clearBtn.addEventListener("click", () => setState(st.clearCenters(state)));

verifyBtn.addEventListener("click", async () => {
  if (!state.sessionId) return;
  try {
    const { verification } = await api.verification(state.sessionId);
    verifyLine.textContent =
      `verification: residual off-diagonal = ` +
      `${formatSig(verification.residual_offdiag_fraction)}, axis angle ` +
      `errors [deg] = [${verification.axis_angle_errors_deg
        .map((v) => formatSig(v))
        .join(", ")}]`;
  } catch (err) {
    surface(err);
  }
});

redraw();
