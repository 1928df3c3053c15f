import type { CompetenceLabel, EventRecord, ServiceState } from "./types.js";

export interface FeedbackResult {
  status: number;
  applied: boolean;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed wrapper around the service's HTTP interface. */
export class ServiceClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl: FetchLike = (input, init) => fetch(input, init)) {
    // normalize so base + "/api/..." never doubles a slash
    this.base = baseUrl.endsWith("/") ? baseUrl.slice(0, -1) : baseUrl;
    this.fetchImpl = fetchImpl;
  }

  async getState(): Promise<ServiceState> {
    const response = await this.fetchImpl(`${this.base}/api/state`);
    if (!response.ok) {
      throw new Error(`state request failed: ${response.status}`);
    }
    return (await response.json()) as ServiceState;
  }

  async getEvents(): Promise<EventRecord[]> {
    const response = await this.fetchImpl(`${this.base}/api/events`);
    if (!response.ok) {
      throw new Error(`events request failed: ${response.status}`);
    }
    return (await response.json()) as EventRecord[];
  }

  /**
   * Submit the operator's judgment for the pending frame. A 409 means the
   * request was no longer pending (someone else answered, or the replay
   * moved on) and must not be retried.
   */
  async submitFeedback(label: CompetenceLabel, frameIndex: number | null): Promise<FeedbackResult> {
    const body: Record<string, unknown> = { label };
    if (frameIndex !== null) {
      body.frame_index = frameIndex;
    }
    const response = await this.fetchImpl(`${this.base}/api/feedback`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return { status: response.status, applied: response.ok };
  }

  imageUrl(frameIndex: number): string {
    return `${this.base}/api/frame/${frameIndex}/image`;
  }
}
