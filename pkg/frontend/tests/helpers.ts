import type { Ctx2D } from "../src/draw";
import type { StateFrame } from "../src/protocol";

export function makeFrame(over: Partial<StateFrame> = {}): StateFrame {
  const w = 16;
  const h = 12;
  return {
    type: "state",
    t: 1.0,
    theta_g: 0,
    theta_f_true: 0,
    theta_f_hat: 0,
    theta_g_hat: 0,
    phi_ctrl: 172.16,
    phi_ref: 172.16,
    duty: 0.085,
    contact: true,
    mode: "tactile",
    grasp: {
      ratios: [0.93, 0.93],
      phases: ["stable", "stable"],
      D_g: 99.5,
      intact: true,
    },
    flow_thumb: {
      w, h,
      u: new Array(w * h).fill(0.5),
      v: new Array(w * h).fill(-0.25),
    },
    ...over,
  };
}

export interface Op {
  op: string;
  args: unknown[];
  fillStyle: string;
  strokeStyle: string;
}

/** Recording 2D context: captures every call with the style that was
 * active at the time, so painter logic is assertable without a real
 * canvas backend. */
export class RecordingCtx implements Ctx2D {
  ops: Op[] = [];
  fillStyle: string | CanvasGradient | CanvasPattern = "#000";
  strokeStyle: string | CanvasGradient | CanvasPattern = "#000";
  lineWidth = 1;
  font = "";
  textAlign: CanvasTextAlign = "start";
  textBaseline: CanvasTextBaseline = "alphabetic";
  globalAlpha = 1;

  private rec(op: string, ...args: unknown[]): void {
    this.ops.push({
      op, args,
      fillStyle: String(this.fillStyle),
      strokeStyle: String(this.strokeStyle),
    });
  }

  clearRect(...a: unknown[]) { this.rec("clearRect", ...a); }
  fillRect(...a: unknown[]) { this.rec("fillRect", ...a); }
  strokeRect(...a: unknown[]) { this.rec("strokeRect", ...a); }
  beginPath() { this.rec("beginPath"); }
  closePath() { this.rec("closePath"); }
  moveTo(...a: unknown[]) { this.rec("moveTo", ...a); }
  lineTo(...a: unknown[]) { this.rec("lineTo", ...a); }
  arc(...a: unknown[]) { this.rec("arc", ...a); }
  stroke() { this.rec("stroke"); }
  fill() { this.rec("fill"); }
  fillText(...a: unknown[]) { this.rec("fillText", ...a); }
  save() { this.rec("save"); }
  restore() { this.rec("restore"); }
  translate(...a: unknown[]) { this.rec("translate", ...a); }
  rotate(...a: unknown[]) { this.rec("rotate", ...a); }

  count(op: string): number {
    return this.ops.filter((o) => o.op === op).length;
  }

  texts(): string[] {
    return this.ops
      .filter((o) => o.op === "fillText")
      .map((o) => String(o.args[0]));
  }
}
