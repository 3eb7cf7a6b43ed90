/** WebSocket wrapper: parses inbound traffic, reports connection state,
 * reconnects with exponential backoff after a drop. Commands are
 * fire-and-forget; the server's ack comes back on the same socket.
 *
 * The constructor is injectable so tests (and Node scripts) can pass
 * the `ws` package's client where there is no browser WebSocket.
 */

import { Command, ServerMessage, parseMessage } from "./protocol";

export interface WsLike {
  onopen: ((ev: unknown) => void) | null;
  onclose: ((ev: unknown) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  send(data: string): void;
  close(): void;
}

export type WsCtor = new (url: string) => WsLike;

export interface SocketHooks {
  onMessage(msg: ServerMessage): void;
  /** Fires on every transition; attempt counts consecutive failures. */
  onStatus(connected: boolean, attempt: number): void;
}

export const BACKOFF_MS = [500, 1000, 2000, 4000, 8000] as const;

export function backoffDelay(attempt: number): number {
  const i = Math.min(attempt, BACKOFF_MS.length - 1);
  return BACKOFF_MS[Math.max(0, i)]!;
}

export class ReconnectingSocket {
  private ws: WsLike | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private attempt = 0;
  private stopped = true;
  private open = false;

  constructor(
    private readonly url: string,
    private readonly hooks: SocketHooks,
    private readonly wsCtor: WsCtor =
      (globalThis as { WebSocket?: WsCtor }).WebSocket as WsCtor,
  ) {
    if (!this.wsCtor) {
      throw new Error("no WebSocket implementation available");
    }
  }

  get connected(): boolean {
    return this.open;
  }

  start(): void {
    if (!this.stopped) return;
    this.stopped = false;
    this.connect();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    const ws = this.ws;
    this.ws = null;
    if (ws) {
      ws.onclose = null;
      ws.close();
    }
    if (this.open) {
      this.open = false;
      this.hooks.onStatus(false, 0);
    }
  }

  /** True if the command went out on an open socket. */
  send(cmd: Command): boolean {
    if (!this.ws || !this.open) return false;
    this.ws.send(JSON.stringify(cmd));
    return true;
  }

  private connect(): void {
    let ws: WsLike;
    try {
      ws = new this.wsCtor(this.url);
    } catch {
      this.scheduleRetry();
      return;
    }
    this.ws = ws;
    ws.onopen = () => {
      if (this.ws !== ws) return;
      this.open = true;
      this.attempt = 0;
      this.hooks.onStatus(true, 0);
    };
    ws.onmessage = (ev) => {
      if (this.ws !== ws) return;
      const msg = parseMessage(String(ev.data));
      if (msg) this.hooks.onMessage(msg);
    };
    ws.onerror = () => { /* the close handler owns recovery */ };
    ws.onclose = () => {
      if (this.ws !== ws) return;
      this.ws = null;
      const wasOpen = this.open;
      this.open = false;
      if (wasOpen || this.attempt === 0) {
        this.hooks.onStatus(false, this.attempt);
      }
      this.scheduleRetry();
    };
  }

  private scheduleRetry(): void {
    if (this.stopped || this.timer !== null) return;
    const delay = backoffDelay(this.attempt);
    this.attempt += 1;
    this.timer = setTimeout(() => {
      this.timer = null;
      if (!this.stopped) this.connect();
    }, delay);
  }
}
