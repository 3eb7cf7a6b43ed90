/** Arrow plot of the downsampled skin flow field. Arrows scale with a
 * shared gain chosen from the largest magnitude in view so small fields
 * stay visible without clipping big ones.
 */

import { Ctx2D, palette } from "./draw";
import type { StateFrame } from "./protocol";

export function drawQuiver(
  ctx: Ctx2D, w: number, h: number,
  thumb: StateFrame["flow_thumb"], contact: boolean,
): void {
  ctx.clearRect(0, 0, w, h);
  if (!contact) {
    ctx.fillStyle = palette.dim;
    ctx.font = "13px sans-serif";
    ctx.textAlign = "center";
    ctx.textBaseline = "middle";
    ctx.fillText("no contact", w / 2, h / 2);
    return;
  }
  const { w: gw, h: gh, u, v } = thumb;
  const cellX = w / gw;
  const cellY = h / gh;
  let maxMag = 0;
  for (let i = 0; i < u.length; i++) {
    const m = Math.hypot(u[i]!, v[i]!);
    if (m > maxMag) maxMag = m;
  }
  const gain = maxMag > 1e-6 ? (0.45 * Math.min(cellX, cellY)) / maxMag : 0;

  ctx.strokeStyle = palette.accent;
  ctx.fillStyle = palette.accent;
  ctx.lineWidth = 1.5;
  for (let r = 0; r < gh; r++) {
    for (let c = 0; c < gw; c++) {
      const i = r * gw + c;
      const x0 = (c + 0.5) * cellX;
      const y0 = (r + 0.5) * cellY;
      const dx = u[i]! * gain;
      const dy = v[i]! * gain;
      ctx.beginPath();
      ctx.moveTo(x0 - dx, y0 - dy);
      ctx.lineTo(x0 + dx, y0 + dy);
      ctx.stroke();
      ctx.beginPath();
      ctx.arc(x0 + dx, y0 + dy, 1.6, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
}
