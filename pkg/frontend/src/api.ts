/**
 * Thin fetch client for the segmentation session service.
 *
 * All methods throw ApiError on non-2xx responses so callers can roll back
 * optimistic UI state. The fetch implementation is injectable for tests.
 */

import type { Polarity, SessionSummary } from "./types";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function raiseForStatus(resp: Response): Promise<Response> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return resp;
}

export class SessionClient {
  private baseUrl: string;
  private fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  /** Upload a PNG image body; resolves to the new session id and size. */
  async createSession(png: ArrayBuffer | Blob): Promise<{ id: string; width: number; height: number }> {
    const resp = await this.fetchImpl(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "image/png" },
      body: png,
    });
    await raiseForStatus(resp);
    return resp.json();
  }

  async getSummary(sessionId: string): Promise<SessionSummary> {
    const resp = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}`);
    await raiseForStatus(resp);
    return resp.json();
  }

  async addClick(sessionId: string, x: number, y: number, polarity: Polarity): Promise<void> {
    const resp = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}/clicks`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ x, y, polarity }),
    });
    await raiseForStatus(resp);
  }

  async undoClick(sessionId: string): Promise<void> {
    const resp = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}/clicks/last`, {
      method: "DELETE",
    });
    await raiseForStatus(resp);
  }

  /** Raw PNG bytes of the current predicted mask. */
  async fetchMask(sessionId: string): Promise<ArrayBuffer> {
    const resp = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}/mask`);
    await raiseForStatus(resp);
    return resp.arrayBuffer();
  }

  /** Raw PNG bytes of one guidance channel rendered as 8-bit grayscale. */
  async fetchChannel(sessionId: string, kind: string): Promise<ArrayBuffer> {
    const resp = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}/channels/${kind}`);
    await raiseForStatus(resp);
    return resp.arrayBuffer();
  }

  maskUrl(sessionId: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/mask`;
  }

  channelUrl(sessionId: string, kind: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/channels/${kind}`;
  }
}
