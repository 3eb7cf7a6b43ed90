/** Client-side session state: the latest frame, bounded command
 * history, and the chart buffers. Everything here is derived from
 * server traffic; the client never simulates.
 */

import { StripChart } from "./charts";
import { palette } from "./draw";
import type { Ack, Command, ServerError, ServerMessage, StateFrame }
  from "./protocol";

export interface HistoryEntry {
  dir: "sent" | "ack" | "error";
  text: string;
}

export const HISTORY_LIMIT = 50;

export class UiSession {
  connected = false;
  latest: StateFrame | null = null;
  framesSeen = 0;
  readonly history: HistoryEntry[] = [];
  readonly phiChart: StripChart;

  constructor(chartCapacity = 2000) {
    this.phiChart = new StripChart(
      [
        { label: "φ ctrl", color: palette.accent },
        { label: "φ ref", color: palette.ref },
      ],
      12, chartCapacity);
  }

  apply(msg: ServerMessage): void {
    if (msg.type === "state") {
      // a reset rewinds sim time; stale history would draw backwards
      if (this.latest && msg.t < this.latest.t) this.phiChart.clear();
      this.latest = msg;
      this.framesSeen += 1;
      this.phiChart.push(msg.t, [msg.phi_ctrl, msg.phi_ref]);
    } else if (msg.type === "ack") {
      this.pushHistory({ dir: "ack", text: formatAck(msg) });
    } else {
      this.pushHistory({ dir: "error", text: formatError(msg) });
    }
  }

  recordSent(cmd: Command): void {
    const [name, value] = Object.entries(cmd)[0]!;
    this.pushHistory({ dir: "sent", text: `${name} ${fmt(value)}` });
  }

  private pushHistory(e: HistoryEntry): void {
    this.history.push(e);
    if (this.history.length > HISTORY_LIMIT) {
      this.history.splice(0, this.history.length - HISTORY_LIMIT);
    }
  }
}

function fmt(v: unknown): string {
  if (v === null) return "";
  if (typeof v === "number") return String(v);
  return String(v);
}

function formatAck(a: Ack): string {
  return `${a.cmd} → ${fmt(a.value)}`;
}

function formatError(e: ServerError): string {
  return e.cmd ? `${e.cmd}: ${e.detail}` : e.detail;
}
