import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { Dashboard } from "../src/dashboard";
import type { WsLike } from "../src/socket";
import { makeFrame } from "./helpers";

class FakeWs implements WsLike {
  static last: FakeWs | null = null;
  onopen: ((ev: unknown) => void) | null = null;
  onclose: ((ev: unknown) => void) | null = null;
  onerror: ((ev: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  sent: string[] = [];

  constructor(readonly url: string) {
    FakeWs.last = this;
  }

  send(data: string): void { this.sent.push(data); }
  close(): void { /* nothing to tear down */ }
  open(): void { this.onopen?.({}); }
  push(obj: unknown): void {
    this.onmessage?.({ data: JSON.stringify(obj) });
  }
}

const HEALTH = {
  status: "ok", mode: "tactile",
  mu_nominal: 0.935, band_d: 0.1, broadcast_hz: 25,
};

function healthFetch(): typeof fetch {
  return (() =>
    Promise.resolve({ json: () => Promise.resolve(HEALTH) })
  ) as unknown as typeof fetch;
}

let root: HTMLElement;
let dash: Dashboard;

beforeEach(() => {
  root = document.createElement("div");
  document.body.appendChild(root);
  dash = new Dashboard({
    root,
    wsUrl: "ws://test/ws",
    healthUrl: "http://test/health",
    wsCtor: FakeWs,
    fetchFn: healthFetch(),
  });
  dash.start();
  FakeWs.last!.open();
});

afterEach(() => {
  dash.stop();
  root.remove();
});

function $(id: string): HTMLElement {
  return root.querySelector(`#${id}`)!;
}

async function settle() {
  await Promise.resolve();
  await Promise.resolve();
}

describe("dashboard", () => {
  it("shows frame values after a render pass", async () => {
    FakeWs.last!.push(makeFrame({ phi_ctrl: 163.21, t: 3.5 }));
    await settle();
    dash.renderOnce();
    expect(dash.displayedPhiCtrl()).toBeCloseTo(163.21);
    expect($("status-readout").textContent).toContain("t 3.50");
    expect($("contact-badge").textContent).toContain("contact");
    expect($("grasp-readout").textContent).toContain("holding");
  });

  it("flags lost contact", async () => {
    FakeWs.last!.push(makeFrame({ contact: false }));
    dash.renderOnce();
    expect($("contact-badge").textContent?.trim()).toBe("no contact");
  });

  it("maps one slider commit to one set_tilt command", () => {
    const slider = $("tilt-slider") as HTMLInputElement;
    slider.value = "9";
    slider.dispatchEvent(new Event("input", { bubbles: true }));
    slider.dispatchEvent(new Event("change", { bubbles: true }));
    expect(FakeWs.last!.sent).toEqual(['{"set_tilt":9}']);
    expect($("tilt-readout").textContent).toBe("9.0°");
  });

  it("slider stays inside the steering range", () => {
    const slider = $("tilt-slider") as HTMLInputElement;
    expect(slider.min).toBe("-12");
    expect(slider.max).toBe("12");
  });

  it("wires load buttons, mode radios, controller, reset", () => {
    const ws = FakeWs.last!;
    (root.querySelector('button[data-kg="0.3"]') as HTMLElement).click();
    const imu = root.querySelector(
      'input[name="mode"][value="imu_foot"]') as HTMLInputElement;
    imu.checked = true;
    imu.dispatchEvent(new Event("change", { bubbles: true }));
    const ctl = $("controller-toggle") as HTMLInputElement;
    ctl.checked = false;
    ctl.dispatchEvent(new Event("change", { bubbles: true }));
    $("reset-btn").click();
    expect(ws.sent).toEqual([
      '{"load_weight":0.3}',
      '{"set_mode":"imu_foot"}',
      '{"controller":"off"}',
      '{"reset":null}',
    ]);
    expect(dash.session.history.filter((h) => h.dir === "sent").length)
      .toBe(4);
  });

  it("records acks and errors in the visible history", async () => {
    FakeWs.last!.push({ type: "ack", cmd: "set_tilt", value: 9 });
    FakeWs.last!.push({ type: "error", detail: "expected a number" });
    dash.renderOnce();
    const hist = $("history").textContent!;
    expect(hist).toContain("set_tilt");
    expect(hist).toContain("expected a number");
  });

  it("shows the banner when the socket drops and clears it on open",
     () => {
    const ws = FakeWs.last!;
    expect($("banner").style.display).toBe("none");
    ws.onclose?.({});
    expect($("banner").style.display).toBe("block");
    expect($("conn-badge").textContent).toBe("offline");
  });

  it("loads the cone geometry from /health", async () => {
    await settle();
    expect(dash.coneInfo).not.toBeNull();
    expect(dash.coneInfo!.mu).toBeCloseTo(0.935);
    expect(dash.coneInfo!.d).toBeCloseTo(0.1);
  });

  it("counts render passes for the fps meter", () => {
    for (let i = 0; i < 12; i++) dash.renderOnce();
    expect(dash.fps()).toBeGreaterThanOrEqual(12);
  });

  it("syncs the mode radios to the server's mode", () => {
    FakeWs.last!.push(makeFrame({ mode: "imu_leg" }));
    dash.renderOnce();
    const leg = root.querySelector(
      'input[name="mode"][value="imu_leg"]') as HTMLInputElement;
    expect(leg.checked).toBe(true);
  });
});
