"""Live steering service: the balance and grasp simulations behind a
WebSocket, so a human can tilt the plate, hang weights on the gripper
and flip modes while state frames stream back.

One asyncio tick loop owns both simulations (single writer).  Commands
land on a queue and are drained at the top of the next tick, so every
accepted command takes effect within two ticks of receipt.  Frames fan
out to per-client queues with a drop-oldest overflow policy: a slow or
gone client loses frames, never stalls the loop.  Acks and errors ride
the same queue, which keeps each socket single-writer.

Messages to the server are single-command JSON objects:

    {"set_tilt": 9.0}        degrees, clamped to the plate range
    {"load_weight": 0.05}    added hanging mass, kg (absolute, >= 0)
    {"set_mode": "tactile"}  or "imu_foot" / "imu_leg"
    {"controller": "on"}     grasp-force controller in/out of the loop
    {"reset": null}          rebuild both simulations

Replies are {"type": "ack", ...} or {"type": "error", ...}; state
frames are {"type": "state", ...}.
"""

from __future__ import annotations

import asyncio
import json
import math
import time
from contextlib import asynccontextmanager, suppress
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from . import __version__, flow_backend, skinsim
from .balance import MODES, BalanceConfig, BalanceSim, ShearInverseEstimator
from .grasp import GraspPlant, GraspSim
from .optflow import downsample_field

THUMB_W = 16
THUMB_H = 12


@dataclass
class ServiceConfig:
    mode: str = "tactile"
    rate_hz: float = 50.0
    broadcast_hz: float = 25.0   # capped at 30: frames are for eyes
    queue_size: int = 8
    seed: int = 0
    grasp_controller_on: bool = True
    realtime: bool = True        # False: tick flat-out (tests)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0 < self.broadcast_hz <= 30.0:
            raise ValueError(
                f"broadcast_hz must be in (0, 30], got {self.broadcast_hz}")
        if self.rate_hz < self.broadcast_hz:
            raise ValueError("rate_hz must be >= broadcast_hz")
        if self.queue_size < 1:
            raise ValueError("queue_size must be >= 1")


class LiveSim:
    """Owns both simulations and the client fan-out."""

    def __init__(self, cfg: ServiceConfig | None = None, *, estimator=None,
                 balance_cfg=None, gains=None, geom=None, skin=None,
                 flow_params=None, grasp_model=None, grasp_plant=None):
        self.cfg = cfg or ServiceConfig()
        self._kw = dict(estimator=estimator, balance_cfg=balance_cfg,
                        gains=gains, geom=geom, skin=skin,
                        flow_params=flow_params, grasp_model=grasp_model,
                        grasp_plant=grasp_plant)
        self.clients: set[asyncio.Queue] = set()
        self.commands: asyncio.Queue = asyncio.Queue()
        self.stride = max(1, round(self.cfg.rate_hz / self.cfg.broadcast_hz))
        self._build()

    def _build(self):
        kw = self._kw
        bcfg = kw["balance_cfg"] or BalanceConfig(rate_hz=self.cfg.rate_hz)
        est = kw["estimator"] or ShearInverseEstimator(
            skin=kw["skin"], geom=kw["geom"])
        sim_kw = {k: kw[k] for k in ("gains", "geom", "skin", "flow_params")
                  if kw[k] is not None}
        self.balance = BalanceSim(self.cfg.mode, bcfg, estimator=est,
                                  seed=self.cfg.seed, **sim_kw)
        plant = kw["grasp_plant"] or GraspPlant(rate_hz=self.cfg.rate_hz)
        self.grasp = GraspSim(kw["grasp_model"], plant,
                              controller_on=self.cfg.grasp_controller_on)
        self.added_mass = 0.0
        self.tick_count = 0
        self.t = 0.0

    # -- command plane ----------------------------------------------------

    def submit(self, text: str) -> dict:
        """Validate one inbound message; enqueue it for the tick loop and
        return the ack (or an error, leaving the simulation untouched)."""
        try:
            msg = json.loads(text)
        except json.JSONDecodeError:
            return {"type": "error", "detail": "message is not valid JSON"}
        if not isinstance(msg, dict) or len(msg) != 1:
            return {"type": "error",
                    "detail": "expected a single-command object"}
        (name, value), = msg.items()
        try:
            value = self._validate(name, value)
        except ValueError as exc:
            return {"type": "error", "cmd": name, "detail": str(exc)}
        self.commands.put_nowait((name, value))
        return {"type": "ack", "cmd": name, "value": value}

    def _validate(self, name, value):
        if name == "set_tilt":
            v = self._finite(value)
            lo, hi = skinsim.ScenarioState.PLATE_RANGE
            return min(max(v, lo), hi)
        if name == "load_weight":
            v = self._finite(value)
            if v < 0:
                raise ValueError("load_weight must be >= 0 kg")
            return v
        if name == "set_mode":
            if value not in MODES:
                raise ValueError(f"mode must be one of {MODES}")
            return value
        if name == "controller":
            if value not in ("on", "off"):
                raise ValueError('controller takes "on" or "off"')
            return value
        if name == "reset":
            return None
        raise ValueError(f"unknown command {name!r}")

    @staticmethod
    def _finite(value):
        try:
            v = float(value)
        except (TypeError, ValueError):
            raise ValueError(f"expected a number, got {value!r}") from None
        if not math.isfinite(v):
            raise ValueError("value must be finite")
        return v

    def _apply(self, name, value):
        if name == "set_tilt":
            self.balance.set_plate_target(value)
        elif name == "load_weight":
            self.added_mass = value
        elif name == "set_mode":
            self.balance.set_mode(value)
        elif name == "controller":
            self.grasp.controller_on = value == "on"
        elif name == "reset":
            self._build()

    # -- frame plane ------------------------------------------------------

    def _thumb(self):
        flow = getattr(self.balance, "last_flow", None)
        if flow is None:
            u = [0.0] * (THUMB_W * THUMB_H)
            return {"w": THUMB_W, "h": THUMB_H, "u": u, "v": list(u)}
        small = downsample_field(np.asarray(flow), THUMB_H, THUMB_W)
        return {"w": THUMB_W, "h": THUMB_H,
                "u": [round(float(x), 3) for x in small[..., 0].ravel()],
                "v": [round(float(x), 3) for x in small[..., 1].ravel()]}

    def _frame(self, brow: dict, grow: dict) -> dict:
        r = lambda x: round(float(x), 4)  # noqa: E731
        # NaN is not JSON; browsers reject the Python-style literal
        opt = lambda x: None if math.isnan(x) else r(x)  # noqa: E731
        ratios = [opt(grow[k]) for k in ("ratio_l", "ratio_r")]
        return {
            "type": "state",
            "t": r(brow["t"]),
            "theta_g": r(brow["theta_g_true"]),
            "theta_f_true": r(brow["theta_f_true"]),
            "theta_f_hat": opt(brow["theta_f_hat"]),
            "theta_g_hat": opt(brow["theta_g_hat"]),
            "phi_ctrl": r(brow["phi_ctrl"]),
            "phi_ref": r(brow["phi_ref"]),
            "duty": r(brow["duty"]),
            "contact": bool(brow["contact"]),
            "mode": brow["mode"],
            "grasp": {
                "ratios": ratios,
                "phases": [grow["phase_l"], grow["phase_r"]],
                "D_g": r(grow["d_g"]),
                "intact": bool(grow["intact"]),
            },
            "flow_thumb": self._thumb(),
        }

    @staticmethod
    def offer(q: asyncio.Queue, item: dict):
        """put_nowait with drop-oldest overflow."""
        try:
            q.put_nowait(item)
        except asyncio.QueueFull:
            with suppress(asyncio.QueueEmpty):
                q.get_nowait()
            with suppress(asyncio.QueueFull):
                q.put_nowait(item)

    def _broadcast(self, frame: dict):
        for q in list(self.clients):
            self.offer(q, frame)

    async def run(self):
        period = 1.0 / self.cfg.rate_hz
        next_t = time.monotonic()
        while True:
            while not self.commands.empty():
                name, value = self.commands.get_nowait()
                self._apply(name, value)
            brow = self.balance.tick()
            grow = self.grasp.tick(self.added_mass)
            self.t = brow["t"]
            self.tick_count += 1
            if self.tick_count % self.stride == 0:
                self._broadcast(self._frame(brow, grow))
            if self.cfg.realtime:
                next_t += period
                delay = next_t - time.monotonic()
                if delay > 0:
                    await asyncio.sleep(delay)
                else:
                    next_t = time.monotonic()  # fell behind: no spiral
            else:
                await asyncio.sleep(0)


async def _drain(websocket: WebSocket, q: asyncio.Queue):
    try:
        while True:
            await websocket.send_json(await q.get())
    except Exception:
        return  # socket gone; the receive loop handles the disconnect


def build_app(cfg: ServiceConfig | None = None, **sim_kwargs) -> FastAPI:
    live = LiveSim(cfg, **sim_kwargs)

    @asynccontextmanager
    async def lifespan(app):
        task = asyncio.create_task(live.run())
        try:
            yield
        finally:
            task.cancel()
            with suppress(asyncio.CancelledError):
                await task

    app = FastAPI(lifespan=lifespan)
    app.state.live = live

    @app.get("/health")
    async def health():
        return {
            "status": "ok",
            "service": "tactilefoot",
            "version": __version__,
            "flow_backend": flow_backend(),
            "mode": live.balance.mode,
            "t": round(live.t, 3),
            "clients": len(live.clients),
            "rate_hz": live.cfg.rate_hz,
            "broadcast_hz": live.cfg.broadcast_hz,
            # dial constants for clients that draw the friction cone
            "mu_nominal": round(live.grasp.mu, 6),
            "band_d": live.grasp.plant.band_d,
        }

    @app.websocket("/ws")
    async def ws(websocket: WebSocket):
        await websocket.accept()
        q: asyncio.Queue = asyncio.Queue(maxsize=live.cfg.queue_size)
        live.clients.add(q)
        sender = asyncio.create_task(_drain(websocket, q))
        try:
            while True:
                text = await websocket.receive_text()
                live.offer(q, live.submit(text))
        except WebSocketDisconnect:
            pass
        finally:
            live.clients.discard(q)
            sender.cancel()
            with suppress(asyncio.CancelledError):
                await sender

    return app


def serve(cfg: ServiceConfig | None = None, *, host: str = "127.0.0.1",
          port: int = 8765, **sim_kwargs):
    """Blocking entry point: run the service until interrupted."""
    import uvicorn

    uvicorn.run(build_app(cfg, **sim_kwargs), host=host, port=port,
                log_level="warning")
