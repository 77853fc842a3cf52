import { describe, expect, it } from "vitest";

import { SseParser } from "../src/sse.js";

describe("SseParser", () => {
  it("parses a complete frame", () => {
    const p = new SseParser();
    const frames = p.push('event: shot-completed\ndata: {"shot_id": 3}\n\n');
    expect(frames).toEqual([{ event: "shot-completed", data: '{"shot_id": 3}' }]);
  });

  it("ignores comment keepalives and the connected banner", () => {
    const p = new SseParser();
    expect(p.push(": connected\n\n")).toEqual([]);
    expect(p.push(": keepalive\n\n")).toEqual([]);
  });

  it("reassembles frames split across arbitrary chunk boundaries", () => {
    const p = new SseParser();
    const whole = 'event: s11-updated\ndata: {"f_mode_hz": 1450000000.0}\n\n';
    const out = [];
    for (let cut = 0; cut < whole.length; cut += 7) {
      out.push(...p.push(whole.slice(cut, cut + 7)));
    }
    expect(out).toEqual([
      { event: "s11-updated", data: '{"f_mode_hz": 1450000000.0}' },
    ]);
  });

  it("handles several frames in one chunk, in order", () => {
    const p = new SseParser();
    const frames = p.push(
      ": connected\n\n" +
        "event: s11-updated\ndata: {}\n\n" +
        "event: shot-completed\ndata: {}\n\n",
    );
    expect(frames.map((f) => f.event)).toEqual(["s11-updated", "shot-completed"]);
  });

  it("keeps an incomplete tail buffered", () => {
    const p = new SseParser();
    expect(p.push("event: shot-completed\ndata: {")).toEqual([]);
    expect(p.push('"x": 1}\n\n')).toEqual([
      { event: "shot-completed", data: '{"x": 1}' },
    ]);
  });

  it("tolerates crlf line endings, including a cr split off at a chunk edge", () => {
    const p = new SseParser();
    expect(p.push("event: s11-updated\r\ndata: {}\r")).toEqual([]);
    const frames = p.push("\n\r\n");
    expect(frames).toEqual([{ event: "s11-updated", data: "{}" }]);
  });

  it("drops frames with no data line", () => {
    const p = new SseParser();
    expect(p.push("event: s11-updated\n\n")).toEqual([]);
  });
});
