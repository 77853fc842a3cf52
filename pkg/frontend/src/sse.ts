// Server-sent-events reader over fetch streaming. The service emits
// "event: <type>\ndata: <json>\n\n" frames plus ": keepalive" comment
// lines; frames can arrive split across arbitrary chunk boundaries, so
// the parser buffers until it sees the blank-line terminator.

import type { BenchEvent } from "./types.js";
import type { FetchLike } from "./api.js";

export interface SseFrame {
  event: string;
  data: string;
}

export class SseParser {
  private buf = "";
  private pendingCr = false;

  push(chunk: string): SseFrame[] {
    // normalize crlf and lone cr to lf; a trailing cr may pair with the
    // first byte of the next chunk, so hold it back until then
    let text = (this.pendingCr ? "\r" : "") + chunk;
    this.pendingCr = text.endsWith("\r");
    if (this.pendingCr) text = text.slice(0, -1);
    this.buf += text.replace(/\r\n/g, "\n").replace(/\r/g, "\n");
    const frames: SseFrame[] = [];
    for (;;) {
      const cut = this.buf.indexOf("\n\n");
      if (cut < 0) break;
      const raw = this.buf.slice(0, cut);
      this.buf = this.buf.slice(cut + 2);
      const frame = parseFrame(raw);
      if (frame) frames.push(frame);
    }
    return frames;
  }
}

function parseFrame(raw: string): SseFrame | null {
  let event = "message";
  const data: string[] = [];
  for (const l of raw.split("\n")) {
    if (!l || l.startsWith(":")) continue;
    const idx = l.indexOf(":");
    const field = idx < 0 ? l : l.slice(0, idx);
    let value = idx < 0 ? "" : l.slice(idx + 1);
    if (value.startsWith(" ")) value = value.slice(1);
    if (field === "event") event = value;
    else if (field === "data") data.push(value);
  }
  if (data.length === 0) return null;
  return { event, data: data.join("\n") };
}

export type ConnectionStatus = "connecting" | "live" | "lost";

export interface EventSubscription {
  close(): void;
}

const KNOWN_EVENTS = new Set(["shot-completed", "s11-updated"]);

export function subscribeEvents(
  base: string,
  onEvent: (e: BenchEvent) => void,
  opts: {
    fetchImpl?: FetchLike;
    retryMs?: number;
    onStatus?: (s: ConnectionStatus) => void;
  } = {},
): EventSubscription {
  const fetchImpl: FetchLike = opts.fetchImpl ?? ((url, init) => fetch(url, init));
  const retryMs = opts.retryMs ?? 1000;
  const ctrl = new AbortController();
  let closed = false;

  const run = async () => {
    while (!closed) {
      opts.onStatus?.("connecting");
      try {
        const res = await fetchImpl(base + "/events", { signal: ctrl.signal });
        if (!res.ok || !res.body) throw new Error(`events endpoint: HTTP ${res.status}`);
        opts.onStatus?.("live");
        const reader = res.body.getReader();
        const decoder = new TextDecoder();
        const parser = new SseParser();
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          for (const frame of parser.push(decoder.decode(value, { stream: true }))) {
            if (KNOWN_EVENTS.has(frame.event)) {
              onEvent(JSON.parse(frame.data) as BenchEvent);
            }
          }
        }
      } catch {
        // connection dropped or refused; retry below unless closed
      }
      if (closed) break;
      opts.onStatus?.("lost");
      await new Promise((r) => setTimeout(r, retryMs));
    }
  };
  void run();

  return {
    close() {
      closed = true;
      ctrl.abort();
    },
  };
}
