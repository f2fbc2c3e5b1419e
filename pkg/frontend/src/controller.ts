/**
 * Session controller: drives the API client and view state together.
 *
 * Clicks are applied optimistically and rolled back if the server rejects
 * them; after every mutation the marker list is re-synced against the
 * server's session summary so the mirror invariant holds even if a request
 * raced or failed midway. One request is in flight per session at a time —
 * later clicks queue behind the current one to preserve server ordering.
 */

import { ApiError, SessionClient } from "./api";
import {
  ViewState,
  addMarker,
  initialViewState,
  markersMatchSummary,
  removeLastMarker,
  syncMarkers,
  withSession,
} from "./state";
import type { Polarity, SessionSummary } from "./types";

export type ErrorSink = (message: string) => void;

export class SessionController {
  state: ViewState;
  private client: SessionClient;
  private onError: ErrorSink;
  private queue: Promise<void> = Promise.resolve();

  constructor(client: SessionClient, onError?: ErrorSink) {
    this.client = client;
    this.onError = onError ?? (() => {});
    this.state = initialViewState();
  }

  /** Serialize mutations so the server sees clicks in UI order. */
  private enqueue(task: () => Promise<void>): Promise<void> {
    this.queue = this.queue.then(task, task);
    return this.queue;
  }

  async openSession(png: ArrayBuffer | Blob): Promise<void> {
    const info = await this.client.createSession(png);
    this.state = withSession(this.state, info.id, info.width, info.height);
  }

  async placeClick(x: number, y: number, polarity: Polarity): Promise<void> {
    return this.enqueue(async () => {
      const sid = this.state.sessionId;
      if (!sid) return;
      this.state = addMarker(this.state, x, y, polarity);
      try {
        await this.client.addClick(sid, x, y, polarity);
      } catch (err) {
        this.state = removeLastMarker(this.state);
        this.report(err);
        return;
      }
      await this.resync(sid);
    });
  }

  async undo(): Promise<void> {
    return this.enqueue(async () => {
      const sid = this.state.sessionId;
      if (!sid) return;
      try {
        await this.client.undoClick(sid);
      } catch (err) {
        this.report(err);
        return;
      }
      this.state = removeLastMarker(this.state);
      await this.resync(sid);
    });
  }

  /** Pull the server summary and force the marker mirror invariant. */
  async resync(sid: string): Promise<SessionSummary | null> {
    try {
      const summary = await this.client.getSummary(sid);
      if (!markersMatchSummary(this.state, summary)) {
        this.state = syncMarkers(this.state, summary);
      }
      return summary;
    } catch (err) {
      this.report(err);
      return null;
    }
  }

  private report(err: unknown): void {
    if (err instanceof ApiError) {
      this.onError(`server error ${err.status}: ${err.message}`);
    } else {
      this.onError(String(err));
    }
  }
}
