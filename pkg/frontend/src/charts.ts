/** Strip chart of two signals over a sliding time window, fed from
 * bounded ring buffers and decimated to the pixel grid before drawing.
 */

import { Column, RingBuffer, decimate } from "./buffers";
import { Ctx2D, palette } from "./draw";

export interface Series {
  buf: RingBuffer;
  color: string;
  label: string;
}

export class StripChart {
  readonly series: Series[];

  constructor(
    series: Array<{ label: string; color: string }>,
    readonly windowS = 12,
    capacity = 2000,
  ) {
    this.series = series.map((s) => ({
      buf: new RingBuffer(capacity), color: s.color, label: s.label,
    }));
  }

  push(t: number, values: number[]): void {
    values.forEach((v, i) => this.series[i]!.buf.push(t, v));
  }

  clear(): void {
    this.series.forEach((s) => s.buf.clear());
  }

  draw(ctx: Ctx2D, w: number, h: number): void {
    ctx.clearRect(0, 0, w, h);
    const tEnd = Math.max(
      ...this.series.map((s) => s.buf.last()?.t ?? 0), this.windowS);
    const t0 = tEnd - this.windowS;

    const cols = this.series.map((s) => decimate(s.buf, t0, tEnd, w));
    let lo = Infinity;
    let hi = -Infinity;
    for (const cs of cols) {
      for (const c of cs) {
        if (c.min < lo) lo = c.min;
        if (c.max > hi) hi = c.max;
      }
    }
    if (!Number.isFinite(lo)) { lo = 0; hi = 1; }
    if (hi - lo < 1e-3) { const m = (hi + lo) / 2; lo = m - 0.5; hi = m + 0.5; }
    const pad = (hi - lo) * 0.1;
    lo -= pad; hi += pad;
    const toY = (v: number) => h - ((v - lo) / (hi - lo)) * h;

    ctx.strokeStyle = palette.grid;
    ctx.lineWidth = 1;
    for (const frac of [0.25, 0.5, 0.75]) {
      const y = h * frac;
      ctx.beginPath();
      ctx.moveTo(0, y);
      ctx.lineTo(w, y);
      ctx.stroke();
    }

    this.series.forEach((s, si) => {
      const cs = cols[si]!;
      if (!cs.length) return;
      ctx.strokeStyle = s.color;
      ctx.lineWidth = 1.6;
      ctx.beginPath();
      let started = false;
      for (const c of cs) {
        const yMin = toY(c.max);
        const yMax = toY(c.min);
        if (!started) {
          ctx.moveTo(c.x + 0.5, yMin);
          started = true;
        }
        ctx.lineTo(c.x + 0.5, yMin);
        if (yMax - yMin > 0.5) ctx.lineTo(c.x + 0.5, yMax);
      }
      ctx.stroke();
    });

    ctx.font = "11px sans-serif";
    ctx.textAlign = "left";
    ctx.textBaseline = "alphabetic";
    let x = 8;
    for (const s of this.series) {
      ctx.fillStyle = s.color;
      const last = s.buf.last();
      const tag = last ? `${s.label} ${last.v.toFixed(2)}` : s.label;
      ctx.fillText(tag, x, 14);
      x += tag.length * 6.4 + 18;
    }
    ctx.fillStyle = palette.dim;
    ctx.textAlign = "right";
    ctx.fillText(`${lo.toFixed(1)}..${hi.toFixed(1)}`, w - 6, h - 6);
  }
}

export type { Column };
