/** Console state and its pure transition functions.
 *
 * All math lives on the server; this module only tracks what the user has
 * clicked and what the server has answered. Two invariants are enforced
 * here: clicked centers always lie within the displayed scan extent, and
 * a fit summary exists only after a successful fit response.
 */

import type { Correction, LatticeFit, ScanData } from "./api.js";
import { CoordinateMap } from "./coords.js";

export interface ClickedCenter {
  x: number;
  y: number;
  /** Lattice index tag, server-proposed or user-set. */
  index?: [number, number];
}

export interface FitSummary {
  fit: LatticeFit;
  correction: Correction;
}

export interface ConsoleState {
  sessionId: string | null;
  /** Uncorrected reference scan ("before" view). */
  before: ScanData | null;
  /** Corrected scan, present after apply-and-rescan ("after" view). */
  after: ScanData | null;
  /** Which of the two scans the heatmap shows. */
  showAfter: boolean;
  centers: ClickedCenter[];
  fitSummary: FitSummary | null;
  correctionApplied: boolean;
  scanInFlight: boolean;
  /** Server error surfaced verbatim; null when the last call succeeded. */
  banner: string | null;
}

export const MIN_CENTERS = 3;

export function initialState(): ConsoleState {
  return {
    sessionId: null,
    before: null,
    after: null,
    showAfter: false,
    centers: [],
    fitSummary: null,
    correctionApplied: false,
    scanInFlight: false,
    banner: null,
  };
}

export function sessionAttached(sessionId: string): ConsoleState {
  return { ...initialState(), sessionId };
}

/** Client side of the one-scan-per-session rule; the server's 409 is the
 * authoritative backstop. Returns the state unchanged when a scan is
 * already running. */
export function scanRequested(state: ConsoleState): ConsoleState {
  if (state.scanInFlight) return state;
  return { ...state, scanInFlight: true, banner: null };
}

export function scanFinished(
  state: ConsoleState,
  data: ScanData,
): ConsoleState {
  const next: ConsoleState = { ...state, scanInFlight: false };
  if (data.corrected) {
    next.after = data;
    next.showAfter = true;
  } else {
    // a fresh uncorrected scan restarts the clicking workflow
    next.before = data;
    next.showAfter = false;
    next.centers = [];
    next.fitSummary = null;
  }
  return next;
}

export function scanFailed(state: ConsoleState, reason: string): ConsoleState {
  return { ...state, scanInFlight: false, banner: reason };
}

export function currentView(state: ConsoleState): ScanData | null {
  return state.showAfter && state.after ? state.after : state.before;
}

export function toggleView(state: ConsoleState): ConsoleState {
  if (!state.after) return state;
  return { ...state, showAfter: !state.showAfter };
}

function extentMap(data: ScanData): CoordinateMap {
  // mapping used only for the extent test; pixel size is irrelevant here
  return new CoordinateMap(data.axis_x, data.axis_y, 2, 2);
}

/** Add a clicked center. Clicks outside the displayed extent are ignored
 * (the canvas cannot produce them, but programmatic callers might). */
export function addCenter(
  state: ConsoleState,
  x: number,
  y: number,
): ConsoleState {
  const view = currentView(state);
  if (!view || !extentMap(view).inExtent(x, y)) return state;
  return { ...state, centers: [...state.centers, { x, y }] };
}

/** Drag-to-adjust: move an existing center, keeping it inside the extent. */
export function moveCenter(
  state: ConsoleState,
  i: number,
  x: number,
  y: number,
): ConsoleState {
  const view = currentView(state);
  if (!view || i < 0 || i >= state.centers.length) return state;
  if (!extentMap(view).inExtent(x, y)) return state;
  const centers = state.centers.slice();
  centers[i] = { ...centers[i], x, y };
  return { ...state, centers };
}

export function removeCenter(state: ConsoleState, i: number): ConsoleState {
  if (i < 0 || i >= state.centers.length) return state;
  const centers = state.centers.slice();
  centers.splice(i, 1);
  return { ...state, centers };
}

export function setCenterIndex(
  state: ConsoleState,
  i: number,
  index: [number, number],
): ConsoleState {
  if (i < 0 || i >= state.centers.length) return state;
  const centers = state.centers.slice();
  centers[i] = { ...centers[i], index };
  return { ...state, centers };
}

export function clearCenters(state: ConsoleState): ConsoleState {
  return { ...state, centers: [], fitSummary: null };
}

/** Whether the fit button is enabled, with the tooltip text when not. */
export function submitEligibility(state: ConsoleState): {
  enabled: boolean;
  reason: string | null;
} {
  if (!state.before) {
    return { enabled: false, reason: "no scan loaded yet" };
  }
  if (state.centers.length < MIN_CENTERS) {
    return {
      enabled: false,
      reason:
        `need at least ${MIN_CENTERS} centers to determine the lattice; ` +
        `have ${state.centers.length}`,
    };
  }
  return { enabled: true, reason: null };
}

export function fitSucceeded(
  state: ConsoleState,
  fit: LatticeFit,
  correction: Correction,
): ConsoleState {
  return { ...state, fitSummary: { fit, correction }, banner: null };
}

/** A rejected fit (e.g. collinear centers): surface the server's reason
 * verbatim and keep any previous summary cleared. */
export function fitRejected(state: ConsoleState, detail: string): ConsoleState {
  return { ...state, fitSummary: null, banner: detail };
}

export function correctionApplied(state: ConsoleState): ConsoleState {
  return { ...state, correctionApplied: true };
}

export function correctionCleared(state: ConsoleState): ConsoleState {
  return { ...state, correctionApplied: false, after: null, showAfter: false };
}
