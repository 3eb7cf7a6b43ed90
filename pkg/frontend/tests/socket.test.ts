import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import type { ServerMessage } from "../src/protocol";
import {
  BACKOFF_MS, ReconnectingSocket, WsLike, backoffDelay,
} from "../src/socket";
import { makeFrame } from "./helpers";

class FakeWs implements WsLike {
  static instances: FakeWs[] = [];
  onopen: ((ev: unknown) => void) | null = null;
  onclose: ((ev: unknown) => void) | null = null;
  onerror: ((ev: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  sent: string[] = [];
  closed = false;

  constructor(readonly url: string) {
    FakeWs.instances.push(this);
  }

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
  }

  serverOpen(): void { this.onopen?.({}); }
  serverSend(obj: unknown): void {
    this.onmessage?.({ data: JSON.stringify(obj) });
  }
  serverClose(): void { this.onclose?.({}); }
}

function collector() {
  const messages: ServerMessage[] = [];
  const statuses: Array<[boolean, number]> = [];
  return {
    messages, statuses,
    hooks: {
      onMessage: (m: ServerMessage) => { messages.push(m); },
      onStatus: (up: boolean, attempt: number) => {
        statuses.push([up, attempt]);
      },
    },
  };
}

beforeEach(() => {
  FakeWs.instances = [];
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

describe("backoffDelay", () => {
  it("doubles up to the cap", () => {
    expect([0, 1, 2, 3, 4, 5, 9].map(backoffDelay))
      .toEqual([500, 1000, 2000, 4000, 8000, 8000, 8000]);
    expect(Math.max(...BACKOFF_MS)).toBe(8000);
  });
});

describe("ReconnectingSocket", () => {
  it("reports connection, dispatches parsed frames, drops junk", () => {
    const c = collector();
    const s = new ReconnectingSocket("ws://x/ws", c.hooks, FakeWs);
    s.start();
    const ws = FakeWs.instances[0]!;
    ws.serverOpen();
    expect(c.statuses).toEqual([[true, 0]]);
    expect(s.connected).toBe(true);
    ws.serverSend(makeFrame());
    ws.onmessage?.({ data: "garbage" });
    ws.serverSend({ type: "ack", cmd: "reset", value: null });
    expect(c.messages.map((m) => m.type)).toEqual(["state", "ack"]);
    s.stop();
  });

  it("only sends on an open socket", () => {
    const c = collector();
    const s = new ReconnectingSocket("ws://x/ws", c.hooks, FakeWs);
    s.start();
    const ws = FakeWs.instances[0]!;
    expect(s.send({ set_tilt: 9 })).toBe(false);
    ws.serverOpen();
    expect(s.send({ set_tilt: 9 })).toBe(true);
    expect(ws.sent).toEqual(['{"set_tilt":9}']);
    s.stop();
  });

  it("reconnects with growing delays and resets after success", () => {
    const c = collector();
    const s = new ReconnectingSocket("ws://x/ws", c.hooks, FakeWs);
    s.start();
    FakeWs.instances[0]!.serverOpen();
    FakeWs.instances[0]!.serverClose(); // drop

    expect(FakeWs.instances.length).toBe(1);
    vi.advanceTimersByTime(499);
    expect(FakeWs.instances.length).toBe(1);
    vi.advanceTimersByTime(1); // 500 ms: first retry
    expect(FakeWs.instances.length).toBe(2);

    FakeWs.instances[1]!.serverClose(); // retry fails
    vi.advanceTimersByTime(999);
    expect(FakeWs.instances.length).toBe(2);
    vi.advanceTimersByTime(1); // 1000 ms: second retry
    expect(FakeWs.instances.length).toBe(3);

    FakeWs.instances[2]!.serverOpen(); // back up; attempt counter resets
    FakeWs.instances[2]!.serverClose();
    vi.advanceTimersByTime(500); // back to the short delay
    expect(FakeWs.instances.length).toBe(4);
    s.stop();
  });

  it("stop cancels the pending retry and closes the socket", () => {
    const c = collector();
    const s = new ReconnectingSocket("ws://x/ws", c.hooks, FakeWs);
    s.start();
    const ws = FakeWs.instances[0]!;
    ws.serverOpen();
    s.stop();
    expect(ws.closed).toBe(true);
    vi.advanceTimersByTime(60000);
    expect(FakeWs.instances.length).toBe(1); // no zombie reconnects
    expect(c.statuses.at(-1)).toEqual([false, 0]);
  });
});
