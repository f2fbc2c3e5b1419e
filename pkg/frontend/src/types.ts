/** Shared types for the interactive segmentation UI. */

export type Polarity = "pos" | "neg";

export interface ClickMarker {
  x: number;
  y: number;
  polarity: Polarity;
  order: number;
}

export interface ScaleInfo {
  s: number;
  f: number;
  f1: number;
  f2: number;
}

export interface SessionSummary {
  id: string;
  width: number;
  height: number;
  clicks: { x: number; y: number; polarity: Polarity }[];
  scale: ScaleInfo | null;
}

/** Guidance channel identifiers understood by the server. */
export const CHANNEL_KINDS = [
  "euclidean_pos",
  "euclidean_neg",
  "gaussian_pos",
  "gaussian_neg",
  "sp_pos",
  "sp_neg",
  "object",
  "sp_pos_scaled",
  "sp_neg_scaled",
  "object_scaled",
  "prev_mask",
] as const;

export type ChannelKind = (typeof CHANNEL_KINDS)[number];

export type OverlaySelection = { kind: "mask" } | { kind: "channel"; channel: ChannelKind };
