/** Side-view schematic: tilted plate, foot resting on it, leg out of
 * the ankle. The leg is drawn at its deviation from vertical, which is
 * the commanded minus the reference motor angle, so a tracking
 * controller shows a plumb leg whatever the plate does.
 */

import { Ctx2D, palette } from "./draw";

export interface SchematicState {
  theta_g: number;              // plate tilt, deg
  theta_f: number | null;       // displayed foot tilt, deg
  phi_ctrl: number;
  phi_ref: number;
  contact: boolean;
}

const DEG = Math.PI / 180;

/** Leg tilt from vertical in degrees; zero when tracking is perfect. */
export function legDeviation(phi_ctrl: number, phi_ref: number): number {
  return phi_ctrl - phi_ref;
}

export function drawSchematic(
  ctx: Ctx2D, w: number, h: number, s: SchematicState,
): void {
  ctx.clearRect(0, 0, w, h);
  const cx = w / 2;
  const cy = h * 0.62;

  // plate through the contact point
  const plateR = Math.min(w, h) * 0.46;
  const pa = -s.theta_g * DEG; // canvas y grows downward
  ctx.beginPath();
  ctx.moveTo(cx - Math.cos(pa) * plateR, cy - Math.sin(pa) * plateR);
  ctx.lineTo(cx + Math.cos(pa) * plateR, cy + Math.sin(pa) * plateR);
  ctx.strokeStyle = palette.dim;
  ctx.lineWidth = 4;
  ctx.stroke();

  // foot: a short bar at the displayed foot tilt, lifted when airborne
  const footR = plateR * 0.35;
  const lift = s.contact ? 0 : h * 0.08;
  const fy = cy - lift;
  const fa = -(s.theta_f ?? s.theta_g) * DEG;
  ctx.beginPath();
  ctx.moveTo(cx - Math.cos(fa) * footR, fy - Math.sin(fa) * footR);
  ctx.lineTo(cx + Math.cos(fa) * footR, fy + Math.sin(fa) * footR);
  ctx.strokeStyle = s.contact ? palette.accent : palette.warn;
  ctx.lineWidth = 6;
  ctx.stroke();

  // leg from the ankle, deviation from vertical
  const legLen = h * 0.5;
  const dev = legDeviation(s.phi_ctrl, s.phi_ref) * DEG;
  const tipX = cx + Math.sin(dev) * legLen;
  const tipY = fy - Math.cos(dev) * legLen;
  ctx.beginPath();
  ctx.moveTo(cx, fy);
  ctx.lineTo(tipX, tipY);
  ctx.strokeStyle = palette.text;
  ctx.lineWidth = 5;
  ctx.stroke();

  // counterweight blob at the top
  ctx.beginPath();
  ctx.arc(tipX, tipY, 9, 0, 2 * Math.PI);
  ctx.fillStyle = palette.text;
  ctx.fill();

  ctx.font = "12px sans-serif";
  ctx.fillStyle = palette.dim;
  ctx.textAlign = "left";
  ctx.textBaseline = "alphabetic";
  ctx.fillText(`plate ${s.theta_g.toFixed(1)}°`, 8, h - 10);
  const devDeg = legDeviation(s.phi_ctrl, s.phi_ref);
  ctx.textAlign = "right";
  ctx.fillText(`leg off vertical ${devDeg.toFixed(2)}°`, w - 8, h - 10);
}
