// Thin client for the analysis service HTTP interface. Every number and
// string the console displays originates from one of these calls; nothing is
// computed locally.

import { readEventStream } from "./sse.js";
import type {
  MessageReply,
  PlanView,
  ServerEvent,
  ToolDescriptorView,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, await describeError(response));
    }
    return response;
  }

  async createSession(): Promise<string> {
    const response = await this.request("/sessions", { method: "POST" });
    const body = (await response.json()) as { id: string };
    return body.id;
  }

  async sendMessage(sessionId: string, text: string): Promise<MessageReply> {
    const response = await this.request(`/sessions/${sessionId}/messages`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
    return (await response.json()) as MessageReply;
  }

  async getPlan(sessionId: string): Promise<PlanView | null> {
    const response = await this.request(`/sessions/${sessionId}/plan`);
    const body = (await response.json()) as { plan: PlanView | null };
    return body.plan;
  }

  async getEvents(sessionId: string, after = 0): Promise<ServerEvent[]> {
    const response = await this.request(
      `/sessions/${sessionId}/events?after=${after}`,
    );
    const body = (await response.json()) as { events: ServerEvent[] };
    return body.events;
  }

  /** Exact text of the stored result artifact; the download uses these bytes. */
  async getResultText(sessionId: string): Promise<string> {
    const response = await this.request(`/sessions/${sessionId}/result`);
    return await response.text();
  }

  async uploadDataset(content: Blob, filename: string): Promise<string> {
    const form = new FormData();
    form.append("file", content, filename);
    const response = await this.request("/datasets", {
      method: "POST",
      body: form,
    });
    const body = (await response.json()) as { name: string };
    return body.name;
  }

  async listTools(): Promise<ToolDescriptorView[]> {
    const response = await this.request("/tools");
    const body = (await response.json()) as { tools: ToolDescriptorView[] };
    return body.tools;
  }

  /**
   * Subscribe to the session event stream, invoking onEvent for every
   * sequenced event until the signal aborts. Keepalive frames are dropped
   * here; deduplication is the reducer's job.
   */
  async streamEvents(
    sessionId: string,
    after: number,
    onEvent: (event: ServerEvent) => void,
    signal: AbortSignal,
  ): Promise<void> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/sessions/${sessionId}/events?after=${after}`,
      { headers: { Accept: "text/event-stream" }, signal },
    );
    if (!response.ok) {
      throw new ApiError(response.status, await describeError(response));
    }
    if (response.body === null) {
      return;
    }
    await readEventStream(
      response.body,
      (frame) => {
        if (frame.id === null) {
          return;
        }
        onEvent(JSON.parse(frame.data) as ServerEvent);
      },
      signal,
    );
  }
}

async function describeError(response: Response): Promise<string> {
  let text = "";
  try {
    text = await response.text();
  } catch {
    return response.statusText;
  }
  try {
    const body = JSON.parse(text) as { detail?: unknown };
    if (typeof body.detail === "string") {
      return body.detail;
    }
    if (body.detail !== undefined) {
      return JSON.stringify(body.detail);
    }
  } catch {
    // fall through to raw text
  }
  return text || response.statusText;
}
