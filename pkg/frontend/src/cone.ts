/** Friction-cone dial: a half-circle gauge from ratio 0 (left) to
 * `max` (right) with the needle at the worse finger's tangential/normal
 * ratio. Inside the cone is green, the uncertainty band yellow,
 * outside red; the live contact phase picks the highlight.
 */

import { Ctx2D, palette } from "./draw";
import type { Phase } from "./protocol";

export interface ConeSpec {
  mu: number;    // nominal friction coefficient (band center)
  d: number;     // band width in ratio units
  max: number;   // full-scale ratio
}

export function coneSpec(mu: number, d: number): ConeSpec {
  if (!(mu > 0) || !(d > 0) || d >= 2 * mu) {
    throw new RangeError(`bad cone spec mu=${mu} d=${d}`);
  }
  // full scale: 1.5x the cone edge, rounded up to one decimal
  return { mu, d, max: Math.ceil((mu + d / 2) * 15) / 10 };
}

export type Zone = "inside" | "band" | "outside";

export function zoneOf(ratio: number, spec: ConeSpec): Zone {
  if (ratio < spec.mu - spec.d / 2) return "inside";
  if (ratio > spec.mu + spec.d / 2) return "outside";
  return "band";
}

/** Needle position as a 0..1 fraction of the sweep, clamped. */
export function needleFrac(ratio: number, spec: ConeSpec): number {
  return Math.min(1, Math.max(0, ratio / spec.max));
}

export function phaseColor(phase: Phase): string {
  switch (phase) {
    case "stable": return palette.good;
    case "incipient": return palette.warn;
    case "recovery": return palette.warn;
    case "slipping": return palette.bad;
    case "broken": return palette.broken;
  }
}

/** Worst finger: the larger defined ratio, or null when neither finger
 * carries normal force. */
export function worstRatio(
  ratios: readonly [number | null, number | null],
): number | null {
  const defined = ratios.filter((r): r is number => r !== null);
  return defined.length ? Math.max(...defined) : null;
}

const SWEEP0 = Math.PI; // left
function angleAt(frac: number): number {
  return SWEEP0 + frac * Math.PI;
}

export function drawConeDial(
  ctx: Ctx2D, w: number, h: number, spec: ConeSpec,
  ratio: number | null, phase: Phase,
): void {
  ctx.clearRect(0, 0, w, h);
  const cx = w / 2;
  const cy = h * 0.82;
  const r = Math.min(w / 2, cy) * 0.86;

  const zones: Array<[number, number, string]> = [
    [0, (spec.mu - spec.d / 2) / spec.max, palette.good],
    [(spec.mu - spec.d / 2) / spec.max,
     (spec.mu + spec.d / 2) / spec.max, palette.warn],
    [(spec.mu + spec.d / 2) / spec.max, 1, palette.bad],
  ];
  for (const [f0, f1, color] of zones) {
    ctx.beginPath();
    ctx.arc(cx, cy, r, angleAt(f0), angleAt(f1));
    ctx.strokeStyle = color;
    ctx.lineWidth = 10;
    ctx.globalAlpha = 0.85;
    ctx.stroke();
  }
  ctx.globalAlpha = 1;

  ctx.font = "11px sans-serif";
  ctx.fillStyle = palette.dim;
  ctx.textAlign = "center";
  ctx.textBaseline = "alphabetic";
  for (const frac of [0, 0.5, 1]) {
    const a = angleAt(frac);
    const tx = cx + Math.cos(a) * (r + 16);
    const ty = cy + Math.sin(a) * (r + 16) + 4;
    ctx.fillText((frac * spec.max).toFixed(1), tx, ty);
  }

  if (ratio === null) {
    ctx.fillStyle = palette.dim;
    ctx.font = "13px sans-serif";
    ctx.fillText("no contact", cx, cy - r / 2);
    return;
  }

  const a = angleAt(needleFrac(ratio, spec));
  ctx.save();
  ctx.translate(cx, cy);
  ctx.rotate(a);
  ctx.beginPath();
  ctx.moveTo(0, 0);
  ctx.lineTo(r - 14, 0);
  ctx.strokeStyle = phaseColor(phase);
  ctx.lineWidth = 3;
  ctx.stroke();
  ctx.restore();

  ctx.beginPath();
  ctx.arc(cx, cy, 5, 0, 2 * Math.PI);
  ctx.fillStyle = phaseColor(phase);
  ctx.fill();

  ctx.fillStyle = palette.text;
  ctx.font = "13px sans-serif";
  ctx.fillText(`${ratio.toFixed(3)}  ${phase}`, cx, cy + 18);
}
