// Incremental parser for text/event-stream frames plus a reader loop that
// feeds it from a fetch response body. The server frames look like
// "id: 7\nevent: step_finished\ndata: {...}\n\n" with occasional id-less
// keepalive frames ("event: stream_idle\ndata: {}\n\n"); chunk boundaries can
// fall anywhere, including mid-line.

export interface SseFrame {
  id: number | null;
  event: string;
  data: string;
}

export class SseParser {
  private buffer = "";

  /** Consume a chunk of stream text and return every frame it completes. */
  push(chunk: string): SseFrame[] {
    this.buffer += chunk;
    const frames: SseFrame[] = [];
    for (;;) {
      const cut = this.buffer.indexOf("\n\n");
      if (cut < 0) {
        break;
      }
      const raw = this.buffer.slice(0, cut);
      this.buffer = this.buffer.slice(cut + 2);
      const frame = parseFrame(raw);
      if (frame !== null) {
        frames.push(frame);
      }
    }
    return frames;
  }
}

function parseFrame(raw: string): SseFrame | null {
  let id: number | null = null;
  let event = "message";
  const dataLines: string[] = [];
  for (const line of raw.split("\n")) {
    if (line.startsWith(":") || line === "") {
      continue;
    }
    const sep = line.indexOf(":");
    const field = sep < 0 ? line : line.slice(0, sep);
    let value = sep < 0 ? "" : line.slice(sep + 1);
    if (value.startsWith(" ")) {
      value = value.slice(1);
    }
    if (field === "id") {
      const parsed = Number.parseInt(value, 10);
      id = Number.isNaN(parsed) ? null : parsed;
    } else if (field === "event") {
      event = value;
    } else if (field === "data") {
      dataLines.push(value);
    }
  }
  if (event === "message" && id === null && dataLines.length === 0) {
    return null;
  }
  return { id, event, data: dataLines.join("\n") };
}

/**
 * Read an event stream until the signal aborts or the stream ends, invoking
 * onFrame for every complete frame. Abort is the normal way to stop: the
 * server keeps the stream open indefinitely.
 */
export async function readEventStream(
  body: ReadableStream<Uint8Array>,
  onFrame: (frame: SseFrame) => void,
  signal?: AbortSignal,
): Promise<void> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  const parser = new SseParser();
  try {
    for (;;) {
      if (signal?.aborted) {
        return;
      }
      const { done, value } = await reader.read();
      if (done) {
        return;
      }
      for (const frame of parser.push(decoder.decode(value, { stream: true }))) {
        onFrame(frame);
      }
    }
  } finally {
    reader.releaseLock();
  }
}
