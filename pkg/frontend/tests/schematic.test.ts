import { describe, expect, it } from "vitest";

import { palette } from "../src/draw";
import { drawSchematic, legDeviation } from "../src/schematic";
import { RecordingCtx } from "./helpers";

function segments(ctx: RecordingCtx): Array<{
  from: number[]; to: number[]; strokeStyle: string;
}> {
  // pair each moveTo with the following lineTo; the style that matters
  // is the one active at the stroke call that flushes the path
  const segs = [];
  for (let i = 0; i < ctx.ops.length - 1; i++) {
    const a = ctx.ops[i]!;
    const b = ctx.ops[i + 1]!;
    if (a.op === "moveTo" && b.op === "lineTo") {
      let style = b.strokeStyle;
      for (let j = i + 2; j < ctx.ops.length; j++) {
        const o = ctx.ops[j]!;
        if (o.op === "stroke") { style = o.strokeStyle; break; }
        if (o.op === "beginPath") break;
      }
      segs.push({
        from: a.args as number[],
        to: b.args as number[],
        strokeStyle: style,
      });
    }
  }
  return segs;
}

describe("drawSchematic", () => {
  it("draws a plumb leg when the command matches the reference", () => {
    expect(legDeviation(163.19, 163.19)).toBe(0);
    const ctx = new RecordingCtx();
    drawSchematic(ctx, 320, 250, {
      theta_g: 9, theta_f: 9.4, phi_ctrl: 163.19, phi_ref: 163.19,
      contact: true,
    });
    const leg = segments(ctx).at(-1)!;
    expect(leg.from[0]).toBeCloseTo(leg.to[0]!, 6); // vertical
    expect(leg.to[1]!).toBeLessThan(leg.from[1]!); // pointing up
  });

  it("tilts the plate with the commanded sign", () => {
    const ctx = new RecordingCtx();
    drawSchematic(ctx, 320, 250, {
      theta_g: 10, theta_f: 10, phi_ctrl: 162, phi_ref: 162, contact: true,
    });
    const plate = segments(ctx)[0]!;
    // positive tilt: left end low, right end high on a y-down canvas
    expect(plate.from[0]!).toBeLessThan(plate.to[0]!);
    expect(plate.from[1]!).toBeGreaterThan(plate.to[1]!);
  });

  it("lifts and recolors the foot when contact is lost", () => {
    const down = new RecordingCtx();
    drawSchematic(down, 320, 250, {
      theta_g: 0, theta_f: 0, phi_ctrl: 172, phi_ref: 172, contact: true,
    });
    const up = new RecordingCtx();
    drawSchematic(up, 320, 250, {
      theta_g: 0, theta_f: -4, phi_ctrl: 172, phi_ref: 172, contact: false,
    });
    const footDown = segments(down)[1]!;
    const footUp = segments(up)[1]!;
    expect(footUp.from[1]!).toBeLessThan(footDown.from[1]!);
    expect(footUp.strokeStyle).toBe(palette.warn);
    expect(footDown.strokeStyle).toBe(palette.accent);
  });

  it("leans the leg by the tracking error", () => {
    const ctx = new RecordingCtx();
    drawSchematic(ctx, 320, 250, {
      theta_g: 0, theta_f: 0, phi_ctrl: 177, phi_ref: 172, contact: true,
    });
    const leg = segments(ctx).at(-1)!;
    expect(leg.to[0]!).toBeGreaterThan(leg.from[0]!); // +5 deg leans right
  });
});
