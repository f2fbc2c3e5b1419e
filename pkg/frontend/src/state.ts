/**
 * View state for one interactive session.
 *
 * The invariant maintained by every mutation path: the local marker list
 * mirrors the server's click list exactly after the round-trip settles.
 * Optimistic updates roll back on server errors.
 */

import type { ClickMarker, OverlaySelection, Polarity, SessionSummary } from "./types";

export interface ViewState {
  sessionId: string | null;
  imageWidth: number;
  imageHeight: number;
  markers: ClickMarker[];
  overlay: OverlaySelection;
  overlayOpacity: number;
  negativeMode: boolean;
}

export function initialViewState(): ViewState {
  return {
    sessionId: null,
    imageWidth: 0,
    imageHeight: 0,
    markers: [],
    overlay: { kind: "mask" },
    overlayOpacity: 0.5,
    negativeMode: false,
  };
}

export function withSession(state: ViewState, id: string, width: number, height: number): ViewState {
  return { ...state, sessionId: id, imageWidth: width, imageHeight: height, markers: [] };
}

export function addMarker(state: ViewState, x: number, y: number, polarity: Polarity): ViewState {
  const marker: ClickMarker = { x, y, polarity, order: state.markers.length };
  return { ...state, markers: [...state.markers, marker] };
}

export function removeLastMarker(state: ViewState): ViewState {
  return { ...state, markers: state.markers.slice(0, -1) };
}

export function setOverlay(state: ViewState, overlay: OverlaySelection): ViewState {
  return { ...state, overlay };
}

export function setOpacity(state: ViewState, opacity: number): ViewState {
  return { ...state, overlayOpacity: Math.min(1, Math.max(0, opacity)) };
}

export function setNegativeMode(state: ViewState, on: boolean): ViewState {
  return { ...state, negativeMode: on };
}

/** Replace local markers with the server's click list (order preserved). */
export function syncMarkers(state: ViewState, summary: SessionSummary): ViewState {
  const markers = summary.clicks.map((c, i) => ({ ...c, order: i }));
  return { ...state, markers };
}

/** True when local markers and a server summary agree click-for-click. */
export function markersMatchSummary(state: ViewState, summary: SessionSummary): boolean {
  if (state.markers.length !== summary.clicks.length) return false;
  return state.markers.every((m, i) => {
    const c = summary.clicks[i];
    return m.x === c.x && m.y === c.y && m.polarity === c.polarity;
  });
}

/**
 * Map a canvas-space position onto integer image pixel coordinates given the
 * drawn image rectangle; null when the position falls outside the image.
 */
export function canvasToImage(
  canvasX: number,
  canvasY: number,
  drawRect: { x: number; y: number; width: number; height: number },
  imageWidth: number,
  imageHeight: number,
): { x: number; y: number } | null {
  const relX = (canvasX - drawRect.x) / drawRect.width;
  const relY = (canvasY - drawRect.y) / drawRect.height;
  if (relX < 0 || relX >= 1 || relY < 0 || relY >= 1) return null;
  const x = Math.floor(relX * imageWidth);
  const y = Math.floor(relY * imageHeight);
  if (x < 0 || x >= imageWidth || y < 0 || y >= imageHeight) return null;
  return { x, y };
}

/** Polarity for a pointer event: modifier key or the explicit toggle flips to negative. */
export function polarityFor(state: ViewState, modifierHeld: boolean): Polarity {
  return modifierHeld || state.negativeMode ? "neg" : "pos";
}
