/** The dashboard proper: builds the DOM, speaks to the live service,
 * and repaints on its own clock, decoupled from frame arrival.
 *
 * Every control maps to exactly one protocol command per gesture (the
 * tilt slider commits on release/step, not per pixel of drag). All
 * displayed values come from server frames; nothing is simulated here.
 */

import { StripChart } from "./charts";
import { ConeSpec, coneSpec, drawConeDial, worstRatio } from "./cone";
import { Ctx2D, palette } from "./draw";
import { Command, HealthInfo, Mode, MODES, healthInfo } from "./protocol";
import { drawQuiver } from "./quiver";
import { drawSchematic } from "./schematic";
import { ReconnectingSocket, WsCtor } from "./socket";
import { UiSession } from "./session";

export interface DashboardOptions {
  root: HTMLElement;
  wsUrl: string;
  healthUrl: string;
  wsCtor?: WsCtor;
  fetchFn?: typeof fetch;
  /** Render clock period when requestAnimationFrame is unavailable. */
  renderIntervalMs?: number;
}

export const LOAD_PRESETS_KG = [0, 0.02, 0.05, 0.1, 0.3] as const;

const TILT_MIN = -12;
const TILT_MAX = 12;

export class Dashboard {
  readonly session = new UiSession();
  private readonly socket: ReconnectingSocket;
  private readonly root: HTMLElement;
  private readonly fetchFn: typeof fetch | null;
  private readonly healthUrl: string;
  private readonly renderIntervalMs: number;
  private cone: ConeSpec | null = null;
  private raf = 0;
  private interval: ReturnType<typeof setInterval> | null = null;
  private healthTimer: ReturnType<typeof setTimeout> | null = null;
  private stamps: number[] = [];
  private running = false;
  private noCanvas = false;

  private els!: {
    banner: HTMLElement;
    badge: HTMLElement;
    tilt: HTMLInputElement;
    tiltReadout: HTMLElement;
    phi: HTMLElement;
    status: HTMLElement;
    contact: HTMLElement;
    graspText: HTMLElement;
    history: HTMLElement;
    fps: HTMLElement;
    schematic: HTMLCanvasElement;
    quiver: HTMLCanvasElement;
    chart: HTMLCanvasElement;
    dial: HTMLCanvasElement;
    modeInputs: HTMLInputElement[];
    controller: HTMLInputElement;
  };

  constructor(private readonly opts: DashboardOptions) {
    this.root = opts.root;
    this.healthUrl = opts.healthUrl;
    this.fetchFn = opts.fetchFn ??
      (typeof fetch === "function" ? fetch.bind(globalThis) : null);
    this.renderIntervalMs = opts.renderIntervalMs ?? 33;
    this.buildDom();
    this.socket = new ReconnectingSocket(
      opts.wsUrl,
      {
        onMessage: (m) => this.session.apply(m),
        onStatus: (up) => this.onStatus(up),
      },
      opts.wsCtor ??
        ((globalThis as { WebSocket?: WsCtor }).WebSocket as WsCtor),
    );
  }

  start(): void {
    if (this.running) return;
    this.running = true;
    this.socket.start();
    this.pollHealth();
    const raf = (globalThis as {
      requestAnimationFrame?: (cb: () => void) => number;
    }).requestAnimationFrame;
    if (typeof raf === "function") {
      const loop = () => {
        if (!this.running) return;
        this.renderOnce();
        this.raf = raf(loop);
      };
      this.raf = raf(loop);
    } else {
      this.interval = setInterval(
        () => this.renderOnce(), this.renderIntervalMs);
    }
  }

  stop(): void {
    this.running = false;
    this.socket.stop();
    if (this.interval !== null) clearInterval(this.interval);
    this.interval = null;
    const caf = (globalThis as {
      cancelAnimationFrame?: (h: number) => void;
    }).cancelAnimationFrame;
    if (this.raf && typeof caf === "function") caf(this.raf);
    this.raf = 0;
    if (this.healthTimer !== null) clearTimeout(this.healthTimer);
    this.healthTimer = null;
  }

  /** Command fan-out point; history records the send. */
  sendCommand(cmd: Command): boolean {
    const ok = this.socket.send(cmd);
    if (ok) this.session.recordSent(cmd);
    return ok;
  }

  /** The phi_ctrl value currently on screen (NaN before first frame). */
  displayedPhiCtrl(): number {
    return parseFloat(this.els.phi.textContent ?? "NaN");
  }

  /** Sustained render rate over the last second. */
  fps(): number {
    const now = performance.now();
    this.stamps = this.stamps.filter((s) => now - s <= 1000);
    return this.stamps.length;
  }

  /** Force one synchronous render pass (the loop calls this too). */
  renderOnce(): void {
    this.stamps.push(performance.now());
    if (this.stamps.length > 600) this.stamps.splice(0, 300);
    const f = this.session.latest;

    this.els.phi.textContent = f ? f.phi_ctrl.toFixed(2) : "—";
    this.els.status.textContent = f
      ? `t ${f.t.toFixed(2)} s   mode ${f.mode}   duty ${f.duty.toFixed(4)}`
      + `   φ ref ${f.phi_ref.toFixed(2)}°`
      : "waiting for frames";
    this.els.contact.textContent = f && f.contact ? "contact" : "no contact";
    this.els.contact.className = f && f.contact ? "badge on" : "badge off";
    if (f) {
      const g = f.grasp;
      this.els.graspText.textContent =
        `grip ${g.D_g.toFixed(1)} mm   ` +
        `${g.intact ? "holding" : "DROPPED"}   phases ${g.phases.join("/")}`;
      for (const input of this.els.modeInputs) {
        input.checked = input.value === f.mode;
      }
    }
    this.els.fps.textContent = `${this.fps()} fps`;

    this.paint(this.els.schematic, (ctx, w, h) => {
      if (f) {
        drawSchematic(ctx, w, h, {
          theta_g: f.theta_g,
          theta_f: f.theta_f_hat ?? f.theta_f_true,
          phi_ctrl: f.phi_ctrl,
          phi_ref: f.phi_ref,
          contact: f.contact,
        });
      } else {
        ctx.clearRect(0, 0, w, h);
      }
    });
    this.paint(this.els.quiver, (ctx, w, h) => {
      if (f) drawQuiver(ctx, w, h, f.flow_thumb, f.contact);
      else ctx.clearRect(0, 0, w, h);
    });
    this.paint(this.els.chart, (ctx, w, h) =>
      this.session.phiChart.draw(ctx, w, h));
    this.paint(this.els.dial, (ctx, w, h) => {
      if (this.cone && f) {
        drawConeDial(ctx, w, h, this.cone,
                     worstRatio(f.grasp.ratios), f.grasp.phases[0]);
      } else {
        ctx.clearRect(0, 0, w, h);
        ctx.fillStyle = palette.dim;
        ctx.font = "12px sans-serif";
        ctx.textAlign = "center";
        ctx.fillText("cone pending", w / 2, h / 2);
      }
    });

    this.renderHistory();
  }

  get coneInfo(): ConeSpec | null {
    return this.cone;
  }

  get phiChart(): StripChart {
    return this.session.phiChart;
  }

  // ------------------------------------------------------------ internals

  private onStatus(up: boolean): void {
    this.session.connected = up;
    this.els.banner.style.display = up ? "none" : "block";
    this.els.badge.textContent = up ? "live" : "offline";
    this.els.badge.className = up ? "badge on" : "badge off";
    if (up && !this.cone) this.pollHealth();
  }

  private pollHealth(): void {
    if (!this.fetchFn || this.cone) return;
    this.fetchFn(this.healthUrl)
      .then((r) => r.json())
      .then((body) => {
        const h: HealthInfo = healthInfo.parse(body);
        this.cone = coneSpec(h.mu_nominal, h.band_d);
      })
      .catch(() => {
        if (!this.running) return;
        if (this.healthTimer !== null) return;
        this.healthTimer = setTimeout(() => {
          this.healthTimer = null;
          this.pollHealth();
        }, 5000);
      });
  }

  private paint(
    canvas: HTMLCanvasElement,
    fn: (ctx: Ctx2D, w: number, h: number) => void,
  ): void {
    if (this.noCanvas) return;
    let ctx: Ctx2D | null = null;
    try {
      ctx = canvas.getContext("2d") as Ctx2D | null;
    } catch {
      ctx = null;
    }
    if (!ctx) {
      // headless DOM without a canvas implementation; stop probing
      this.noCanvas = true;
      return;
    }
    fn(ctx, canvas.width, canvas.height);
  }

  private renderHistory(): void {
    const items = this.session.history.slice(-8).reverse();
    const text = items
      .map((e) => `${e.dir === "sent" ? "→" : e.dir === "ack" ? "✓" : "✗"} ${e.text}`)
      .join("\n");
    if (this.els.history.textContent !== text) {
      this.els.history.textContent = text;
    }
  }

  private buildDom(): void {
    this.root.innerHTML = `
      <div class="banner" id="banner" style="display:none">
        connection lost, retrying…</div>
      <header>
        <h1>tactile foot</h1>
        <span class="badge off" id="conn-badge">offline</span>
        <span id="fps-readout" class="dim"></span>
        <span id="status-readout" class="dim"></span>
      </header>
      <main>
        <section class="panel">
          <h2>leg &amp; plate</h2>
          <canvas id="schematic" width="320" height="250"></canvas>
          <div class="row">
            <label for="tilt-slider">plate tilt</label>
            <input id="tilt-slider" type="range"
                   min="${TILT_MIN}" max="${TILT_MAX}" step="0.5" value="0">
            <span id="tilt-readout">0.0°</span>
          </div>
          <div class="row dim">φ ctrl
            <span id="phi-readout" class="big">—</span>°</div>
        </section>
        <section class="panel">
          <h2>skin flow</h2>
          <canvas id="quiver" width="256" height="192"></canvas>
          <div class="row"><span id="contact-badge" class="badge off">
            no contact</span></div>
        </section>
        <section class="panel wide">
          <h2>motor angle: commanded vs reference</h2>
          <canvas id="phi-chart" width="560" height="190"></canvas>
        </section>
        <section class="panel">
          <h2>friction cone</h2>
          <canvas id="cone-dial" width="260" height="180"></canvas>
          <div class="row" id="grasp-readout"></div>
          <div class="row" id="load-buttons">
            ${LOAD_PRESETS_KG.map((kg) =>
              `<button data-kg="${kg}">${kg === 0 ? "unload"
                : `${Math.round(kg * 1000)} g`}</button>`).join("")}
          </div>
        </section>
        <section class="panel">
          <h2>controls</h2>
          <div class="row" id="mode-radios">
            ${MODES.map((m, i) => `
              <label><input type="radio" name="mode" value="${m}"
                ${i === 0 ? "checked" : ""}> ${m}</label>`).join("")}
          </div>
          <div class="row">
            <label><input type="checkbox" id="controller-toggle" checked>
              slip controller</label>
            <button id="reset-btn">reset</button>
          </div>
          <pre id="history"></pre>
        </section>
      </main>`;

    const get = <T extends HTMLElement>(id: string): T => {
      const el = this.root.querySelector<T>(`#${id}`);
      if (!el) throw new Error(`missing element #${id}`);
      return el;
    };
    this.els = {
      banner: get("banner"),
      badge: get("conn-badge"),
      tilt: get<HTMLInputElement>("tilt-slider"),
      tiltReadout: get("tilt-readout"),
      phi: get("phi-readout"),
      status: get("status-readout"),
      contact: get("contact-badge"),
      graspText: get("grasp-readout"),
      history: get("history"),
      fps: get("fps-readout"),
      schematic: get<HTMLCanvasElement>("schematic"),
      quiver: get<HTMLCanvasElement>("quiver"),
      chart: get<HTMLCanvasElement>("phi-chart"),
      dial: get<HTMLCanvasElement>("cone-dial"),
      modeInputs: [...this.root.querySelectorAll<HTMLInputElement>(
        "#mode-radios input")],
      controller: get<HTMLInputElement>("controller-toggle"),
    };

    this.els.tilt.addEventListener("input", () => {
      this.els.tiltReadout.textContent =
        `${parseFloat(this.els.tilt.value).toFixed(1)}°`;
    });
    // one command per committed slider value, not per drag pixel
    this.els.tilt.addEventListener("change", () => {
      this.sendCommand({ set_tilt: parseFloat(this.els.tilt.value) });
    });
    for (const input of this.els.modeInputs) {
      input.addEventListener("change", () => {
        if (input.checked) {
          this.sendCommand({ set_mode: input.value as Mode });
        }
      });
    }
    this.els.controller.addEventListener("change", () => {
      this.sendCommand(
        { controller: this.els.controller.checked ? "on" : "off" });
    });
    get("reset-btn").addEventListener("click", () => {
      this.sendCommand({ reset: null });
    });
    get("load-buttons").addEventListener("click", (ev) => {
      const btn = (ev.target as HTMLElement).closest("button");
      if (!btn) return;
      this.sendCommand({ load_weight: Number(btn.dataset["kg"]) });
    });
  }
}
