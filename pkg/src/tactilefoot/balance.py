"""Quasi-static balance control of the one-legged foot-on-plate rig.

The controller maps (ground tilt, foot tilt) estimates to a desired
motor angle (the arccos linkage law), converts it to a PWM duty cycle
with a damped affine law, and drives a first-order servo plant.  Three
sensing modes are supported:

* ``tactile``   -- dense flow from the skin camera; actuation is gated on
  detected contact and the pose network supplies both angle estimates.
* ``imu_foot``  -- a foot-mounted inclinometer; its reading stands in for
  both angles (the ground tilt is not observable) and actuation never
  pauses.
* ``imu_leg``   -- a leg-mounted inclinometer holding the absolute leg
  inclination at a fixed setpoint.

The plant resolves foot/leg kinematics each tick: in contact the foot
conforms to the plate (plus the compliance term from the skin model) and
the servo angle positions the leg; off the ground the rig holds the leg
while the servo swings the free foot.  A touchdown whose foot-plate
mismatch exceeds what the skin can absorb, or a leg lean past the
tip-over limit, latches an ``unstable`` flag on the trace.

Sensing runs every ``sense_every`` ticks and the control law consumes
the latest completed estimate (freshest-value semantics), so the loop
itself never blocks on the flow computation.
"""

from __future__ import annotations

import csv
import math
import warnings
from collections import deque
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import skinsim
from .optflow import dis_flow, downsample_field, generate_pattern
from .optflow.dis import FlowParams

MODES = ("tactile", "imu_foot", "imu_leg")

# Noise-stream salts (per-tick field seeds stay at small indexes).
_PATTERN_SEED_INDEX = 10 ** 9 + 1
_IMU_SEED_INDEX = 10 ** 9 + 3

# The duty law's nominal output span maps onto the servo's full travel.
DUTY_MIN = 0.025
DUTY_MAX = 0.0875
SERVO_TRAVEL = (0.0, 180.0)


@dataclass
class ControllerGains:
    """Constants of the duty-cycle law; defaults follow the rig tuning."""

    K0: float = 0.01   # overall duty scale
    K1: float = 28.8   # degrees per duty unit
    K2: float = 0.03   # derivative damping, seconds
    K3: float = 2.5    # bias term
    pwm_hz: float = 50.0

    def __post_init__(self):
        if self.K1 == 0:
            raise ValueError("K1 must be nonzero")
        if self.pwm_hz <= 0:
            raise ValueError(f"pwm_hz must be positive, got {self.pwm_hz}")


def control_angle(theta_g_hat: float, theta_f_hat: float,
                  geom: skinsim.LegGeometry) -> float:
    """Desired motor angle (degrees) that brings the leg vertical given
    the ground- and foot-tilt estimates."""
    arg = geom.l * math.cos(math.radians(theta_g_hat - theta_f_hat)) / geom.L
    if not -1.0 <= arg <= 1.0:
        raise ValueError(
            f"arccos argument {arg} outside [-1, 1] "
            f"(theta_g_hat={theta_g_hat}, theta_f_hat={theta_f_hat}, "
            f"l={geom.l}, L={geom.L})")
    return math.degrees(math.acos(arg)) + 90.0 - theta_g_hat


def duty_cycle(phi_ctrl: float, dphi_dt: float,
               gains: ControllerGains) -> float:
    """PWM duty fraction for a desired motor angle and its rate, clamped
    to [0, 1]."""
    d = gains.K0 * (phi_ctrl / gains.K1 - gains.K2 * dphi_dt + gains.K3)
    return min(1.0, max(0.0, d))


def contact_detect(field: np.ndarray, threshold_px: float | None = None) -> bool:
    """True when the mean per-pixel displacement magnitude reaches the
    threshold (default: 3x the skin noise sigma, in the same px units as
    the field)."""
    if threshold_px is None:
        threshold_px = 3.0 * skinsim.SkinParams().sigma_noise
    mag = np.hypot(field[..., 0], field[..., 1])
    return bool(float(np.mean(mag)) >= threshold_px)


def duty_to_servo_target(duty: float) -> float:
    """Affine servo calibration: the nominal duty span covers the full
    travel; commands outside it clamp at the travel limits."""
    angle = (duty - DUTY_MIN) / (DUTY_MAX - DUTY_MIN) * SERVO_TRAVEL[1]
    return min(max(angle, SERVO_TRAVEL[0]), SERVO_TRAVEL[1])


@dataclass
class BalanceConfig:
    """Loop, plant and sensing settings for closed-loop runs."""

    rate_hz: float = 50.0
    sense_every: int = 3       # flow/pose update period, in ticks
    est_alpha: float = 0.3     # EMA weight on fresh angle estimates
    slew_dps: float = 5.0      # plate actuator speed
    tau_servo: float = 0.1     # servo first-order lag, s
    servo_max_dps: float = 300.0  # servo travel speed limit
    deriv_tau: float = 0.08    # smoothing pole on the duty-law derivative, s
    imu_noise_deg: float = 0.2
    contact_threshold: float | None = None  # None -> 3x skin noise sigma
    lambda_set: float = 0.0    # imu_leg inclination setpoint
    theta_g_init: float = 0.0
    # Lift/touchdown event model: how far the operator tips the held leg,
    # how much foot-plate mismatch the skin absorbs on landing, and the
    # lean beyond which the rig tips over.
    lift_perturb: float = 0.0
    conform_max: float = 6.0
    tip_deg: float = 12.0
    # Skin camera raster and sticker tiling (must match the estimator's
    # training data conventions).
    cam_w: int = 160
    cam_h: int = 120
    patches_x: int = 80
    patches_y: int = 60
    candidates_k: int = 8

    def __post_init__(self):
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be positive")
        if self.sense_every < 1:
            raise ValueError("sense_every must be >= 1")
        if not 0.0 < self.est_alpha <= 1.0:
            raise ValueError("est_alpha must be in (0, 1]")
        if self.slew_dps <= 0 or self.tau_servo <= 0:
            raise ValueError("slew_dps and tau_servo must be positive")
        if self.servo_max_dps <= 0 or self.deriv_tau <= 0:
            raise ValueError("servo_max_dps and deriv_tau must be positive")
        px = self.cam_w // self.patches_x
        if px < 1 or self.cam_w != px * self.patches_x \
                or self.cam_h != px * self.patches_y:
            raise ValueError(
                f"camera raster {self.cam_w}x{self.cam_h} does not tile "
                f"{self.patches_x}x{self.patches_y} patches evenly")

    @property
    def patch_px(self):
        return self.cam_w // self.patches_x


_COLUMNS = ("t", "theta_g_true", "theta_f_true", "theta_g_hat",
            "theta_f_hat", "phi_ctrl", "phi_ref", "duty", "contact", "mode")


@dataclass
class ControlTrace:
    """Per-tick log of one closed-loop run.  Angle estimates are NaN on
    ticks where the active mode had none.  ``contact`` is the state the
    controller acted on: the detector output in tactile mode, the true
    flag in the IMU modes."""

    t: np.ndarray
    theta_g_true: np.ndarray
    theta_f_true: np.ndarray
    theta_g_hat: np.ndarray
    theta_f_hat: np.ndarray
    phi_ctrl: np.ndarray
    phi_ref: np.ndarray
    duty: np.ndarray
    contact: np.ndarray
    mode: str
    unstable: bool = False
    unstable_t: float | None = None
    unstable_reason: str = ""
    meta: dict = dc_field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    def validate(self):
        if len(self.t) and not np.all(np.diff(self.t) > 0):
            raise ValueError("trace times must be strictly increasing")
        if len(self.duty) and (self.duty.min() < 0 or self.duty.max() > 1):
            raise ValueError("duty out of [0, 1]")

    def rmse_tracking(self) -> float:
        """RMSE between the commanded and the reference motor angle over
        ticks where both are defined."""
        ok = np.isfinite(self.phi_ctrl) & np.isfinite(self.phi_ref)
        if not ok.any():
            return float("nan")
        d = self.phi_ctrl[ok] - self.phi_ref[ok]
        return float(np.sqrt(np.mean(d * d)))

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(_COLUMNS)
            for i in range(len(self.t)):
                w.writerow([
                    f"{self.t[i]:.6f}",
                    f"{self.theta_g_true[i]:.6f}",
                    f"{self.theta_f_true[i]:.6f}",
                    f"{self.theta_g_hat[i]:.6f}",
                    f"{self.theta_f_hat[i]:.6f}",
                    f"{self.phi_ctrl[i]:.6f}",
                    f"{self.phi_ref[i]:.6f}",
                    f"{self.duty[i]:.6f}",
                    int(self.contact[i]),
                    self.mode,
                ])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        if not rows or tuple(rows[0]) != _COLUMNS:
            raise ValueError(f"{path}: not a control trace (bad header)")
        body = rows[1:]
        cols = {name: [] for name in _COLUMNS[:-1]}
        mode = body[0][-1] if body else ""
        for r in body:
            for name, v in zip(_COLUMNS[:-1], r):
                cols[name].append(float(v))
        arr = {k: np.asarray(v, dtype=np.float64) for k, v in cols.items()}
        tr = cls(t=arr["t"], theta_g_true=arr["theta_g_true"],
                 theta_f_true=arr["theta_f_true"],
                 theta_g_hat=arr["theta_g_hat"],
                 theta_f_hat=arr["theta_f_hat"], phi_ctrl=arr["phi_ctrl"],
                 phi_ref=arr["phi_ref"], duty=arr["duty"],
                 contact=arr["contact"].astype(bool), mode=mode)
        tr.validate()
        return tr


def _estimator_dims(estimator):
    dims = getattr(estimator, "input_dims", None)
    if dims is not None:
        return tuple(dims)
    spec = estimator.model.spec
    return (spec.in_h, spec.in_w)


class ShearInverseEstimator:
    """Closed-form pose estimate from the mean shear of a flow field.

    Inverts the flat-ground shear model (mean u = k_s sin theta_g) and
    assumes a balanced leg, where foot and plate tilt coincide.  Far
    cruder than a trained network but dependency-free; used as the
    default when no checkpoint is supplied.
    """

    def __init__(self, dims=(32, 28), skin=None, geom=None):
        self.input_dims = tuple(dims)
        self._skin = skin or skinsim.SkinParams()
        self._geom = geom or skinsim.LegGeometry()

    def predict_degrees(self, fields):
        f = np.asarray(fields, dtype=np.float64)
        if f.ndim == 3:
            f = f[None]
        u_mean = f[..., 0].mean(axis=(1, 2))
        s = np.clip(u_mean / self._skin.k_s, -1.0, 1.0)
        tg = np.degrees(np.arcsin(s))
        out = np.empty((len(tg), 2))
        for i, g in enumerate(tg):
            tf = skinsim.foot_tilt(g, 90.0 - g, self._geom, self._skin)
            out[i] = (tf, g)
        return out


class BalanceSim:
    """Closed-loop plant plus controller, advanced one tick at a time.

    External drivers (the scenario runner, the live service) set the
    plate target, the contact flag and the mode between ticks; ``tick``
    advances the world by one control period and returns the trace row.
    """

    def __init__(self, mode: str, cfg: BalanceConfig | None = None, *,
                 gains: ControllerGains | None = None,
                 geom: skinsim.LegGeometry | None = None,
                 skin: skinsim.SkinParams | None = None,
                 estimator=None, flow_params: FlowParams | None = None,
                 seed: int = 0):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}, expected one of {MODES}")
        self.cfg = cfg or BalanceConfig()
        self.gains = gains or ControllerGains(pwm_hz=self.cfg.rate_hz)
        self.geom = geom or skinsim.LegGeometry()
        self.skin = skin or skinsim.SkinParams()
        self.estimator = estimator
        self.flow_params = flow_params or FlowParams()
        self.seed = int(seed)
        self.mode = mode
        self.dt = 1.0 / self.cfg.rate_hz
        self._acos0 = math.degrees(math.acos(self.geom.l / self.geom.L))
        self._unit = skinsim.REFERENCE_WIDTH / self.cfg.cam_w
        self._threshold = self.cfg.contact_threshold
        if self._threshold is None:
            self._threshold = 3.0 * self.skin.sigma_noise
        self._imu_rng = np.random.default_rng(
            skinsim.field_seed(self.seed, _IMU_SEED_INDEX))

        if mode == "tactile":
            if estimator is None:
                raise ValueError("tactile mode needs a pose estimator")
            self._net_dims = _estimator_dims(estimator)
            self.pattern = generate_pattern(
                self.cfg.patches_x, self.cfg.patches_y, self.cfg.patch_px,
                self.cfg.candidates_k,
                skinsim.field_seed(self.seed, _PATTERN_SEED_INDEX))
        else:
            self._net_dims = None
            self.pattern = None

        # Plant state: start balanced on the initial plate angle.
        tg = self.cfg.theta_g_init
        self.theta_g = tg
        self.plate_target = tg
        self.theta_leg = 90.0 - tg
        self.theta_f = skinsim.foot_tilt(tg, self.theta_leg, self.geom,
                                         self.skin)
        self.lam = self.theta_g + self.theta_leg - 90.0
        self.phi_servo = control_angle(tg, self.theta_f, self.geom)
        self.in_contact = True
        self.contact_cmd = True
        self.lam_hold = 0.0
        self.last_duty = duty_cycle(self.phi_servo, 0.0, self.gains)
        self.unstable = False
        self.unstable_t = None
        self.unstable_reason = ""
        self.tick_index = 0
        self.t = 0.0
        self.last_flow = np.zeros((self.cfg.cam_h, self.cfg.cam_w, 2),
                                  dtype=np.float32)
        self._reset_controller()

    def _reset_controller(self):
        self.est_f = None
        self.est_g = None
        self.gate = False
        self._phi_hist = None
        self._prev_med = None
        self._dphi_filt = 0.0
        self._lam_ema = None
        self.last_phi_ctrl = float("nan")

    # -- external commands -------------------------------------------------

    def set_plate_target(self, theta_g: float):
        self.plate_target = float(theta_g)

    def set_contact(self, flag: bool):
        self.contact_cmd = bool(flag)

    def set_mode(self, mode: str):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}, expected one of {MODES}")
        if mode == "tactile" and self.estimator is None:
            raise ValueError("tactile mode needs a pose estimator")
        if mode == "tactile" and self.pattern is None:
            self._net_dims = _estimator_dims(self.estimator)
            self.pattern = generate_pattern(
                self.cfg.patches_x, self.cfg.patches_y, self.cfg.patch_px,
                self.cfg.candidates_k,
                skinsim.field_seed(self.seed, _PATTERN_SEED_INDEX))
        self.mode = mode
        self._reset_controller()

    # -- one control period ------------------------------------------------

    def _latch_unstable(self, reason: str):
        if not self.unstable:
            self.unstable = True
            self.unstable_t = self.t
            self.unstable_reason = reason

    def _duty_from_phi(self, phi: float) -> float:
        # Derivative from a backward difference of the median-of-3
        # prefiltered command, then a first-order smoother (the raw
        # tick-rate difference rings against the servo when the foot is
        # off the ground); the proportional term uses the raw value.
        if self._phi_hist is None:
            self._phi_hist = deque([phi] * 3, maxlen=3)
        else:
            self._phi_hist.append(phi)
        med = sorted(self._phi_hist)[1]
        raw = 0.0 if self._prev_med is None else (med - self._prev_med) / self.dt
        self._prev_med = med
        a = self.dt / (self.dt + self.cfg.deriv_tau)
        self._dphi_filt += a * (raw - self._dphi_filt)
        return duty_cycle(phi, self._dphi_filt, self.gains)

    def tick(self) -> dict:
        cfg = self.cfg

        # Plate slews toward its target at the actuator rate.
        step = cfg.slew_dps * self.dt
        err = self.plate_target - self.theta_g
        self.theta_g += min(max(err, -step), step)

        # Contact transitions commanded since the previous tick.
        if self.contact_cmd != self.in_contact:
            if self.contact_cmd:
                hang = self.lam_hold + 90.0 - self.phi_servo + self._acos0
                mismatch = hang - self.theta_g
                if abs(mismatch) > cfg.conform_max:
                    self._latch_unstable(
                        f"touchdown foot-plate mismatch {mismatch:+.2f} deg "
                        f"exceeds {cfg.conform_max} deg")
                self.in_contact = True
                self.theta_f = self.theta_g  # conformed seed for the A-term
            else:
                self.in_contact = False
                self.lam_hold = self.lam + cfg.lift_perturb

        # Plant kinematics.
        if self.in_contact:
            a = math.degrees(math.acos(
                self.geom.l * math.cos(math.radians(self.theta_g - self.theta_f))
                / self.geom.L))
            self.theta_leg = self.phi_servo - a
            self.theta_f = skinsim.foot_tilt(self.theta_g, self.theta_leg,
                                             self.geom, self.skin)
            self.lam = self.theta_g + self.theta_leg - 90.0
            if abs(self.lam) > cfg.tip_deg:
                self._latch_unstable(
                    f"leg lean {self.lam:+.2f} deg exceeds tip-over limit "
                    f"{cfg.tip_deg} deg")
        else:
            self.theta_leg = self.phi_servo - self._acos0
            self.theta_f = self.lam_hold + 90.0 - self.phi_servo + self._acos0
            self.lam = self.lam_hold

        # Sense and control.
        hat_f = float("nan")
        hat_g = float("nan")
        if self.mode == "tactile":
            if self.tick_index % cfg.sense_every == 0:
                self._sense()
            contact_seen = self.gate
            if self.gate and self.est_f is not None:
                phi = control_angle(self.est_g, self.est_f, self.geom)
                self.last_phi_ctrl = phi
                self.last_duty = self._duty_from_phi(phi)
            if self.est_f is not None:
                hat_f, hat_g = self.est_f, self.est_g
        elif self.mode == "imu_foot":
            n = cfg.imu_noise_deg
            th = self.theta_f + float(self._imu_rng.uniform(-n, n))
            # Same smoothing the tactile estimates get; the reading
            # stands in for both angles.
            if self.est_f is None:
                self.est_f = th
            else:
                self.est_f += cfg.est_alpha * (th - self.est_f)
            phi = control_angle(self.est_f, self.est_f, self.geom)
            self.last_phi_ctrl = phi
            self.last_duty = self._duty_from_phi(phi)
            hat_f = hat_g = self.est_f
            contact_seen = self.in_contact
        else:  # imu_leg
            n = cfg.imu_noise_deg
            lam_meas = self.lam + float(self._imu_rng.uniform(-n, n))
            if self._lam_ema is None:
                self._lam_ema = lam_meas
            else:
                self._lam_ema += cfg.est_alpha * (lam_meas - self._lam_ema)
            phi = self.phi_servo - (self._lam_ema - cfg.lambda_set)
            self.last_phi_ctrl = phi
            self.last_duty = self._duty_from_phi(phi)
            contact_seen = self.in_contact

        # Servo plant: first-order lag toward the duty-commanded angle,
        # capped at the servo's travel speed.
        target = duty_to_servo_target(self.last_duty)
        blend = 1.0 - math.exp(-self.dt / cfg.tau_servo)
        move = (target - self.phi_servo) * blend
        cap = cfg.servo_max_dps * self.dt
        self.phi_servo += min(max(move, -cap), cap)
        self.phi_servo = min(max(self.phi_servo, SERVO_TRAVEL[0]),
                             SERVO_TRAVEL[1])

        phi_ref = control_angle(self.theta_g, self.theta_f, self.geom)
        row = {
            "t": self.t,
            "theta_g_true": self.theta_g,
            "theta_f_true": self.theta_f,
            "theta_g_hat": hat_g,
            "theta_f_hat": hat_f,
            "phi_ctrl": self.last_phi_ctrl,
            "phi_ref": phi_ref,
            "duty": self.last_duty,
            "contact": contact_seen,
            "mode": self.mode,
        }
        self.tick_index += 1
        self.t = self.tick_index * self.dt
        return row

    def _sense(self):
        """Run the skin camera pipeline once and fold the result into the
        held estimates."""
        state = skinsim.ScenarioState(theta_g=self.theta_g,
                                      theta_leg=self.theta_leg,
                                      theta_f=self.theta_f,
                                      contact=self.in_contact, t=self.t)
        dfield = skinsim.deformation_field(
            state, self.geom, self.skin, self.cfg.cam_w, self.cfg.cam_h,
            skinsim.field_seed(self.seed, self.tick_index))
        frame = skinsim.render_frame(self.pattern, dfield)
        flow = dis_flow(self.pattern, frame, self.flow_params) * self._unit
        self.last_flow = flow
        detected = contact_detect(flow, self._threshold)
        if detected and not self.gate:
            # Re-contact: drop stale estimates and derivative history.
            self.est_f = None
            self.est_g = None
            self._phi_hist = None
            self._prev_med = None
        self.gate = detected
        if not detected:
            return
        down = downsample_field(flow, self._net_dims[0], self._net_dims[1])
        pf, pg = self.estimator.predict_degrees(down[None])[0]
        if self.est_f is None:
            self.est_f, self.est_g = float(pf), float(pg)
        else:
            a = self.cfg.est_alpha
            self.est_f += a * (float(pf) - self.est_f)
            self.est_g += a * (float(pg) - self.est_g)


def four_stage_profile(dwell: float = 6.0):
    """Plate schedule of the four-stage tilt experiment."""
    levels = (9.0, 0.0, -9.5, 0.0)
    return [skinsim.ProfileKnot(t=i * dwell, theta_g=v)
            for i, v in enumerate(levels)]


def lift_replace_profile(theta_initial: float = 0.0,
                         theta_changed: float = 0.0,
                         t_lift: float = 4.0, t_down: float = 10.0):
    """Stand, lift the rig off the plate, optionally move the plate,
    set the rig back down."""
    return [
        skinsim.ProfileKnot(t=0.0, theta_g=theta_initial, contact=True),
        skinsim.ProfileKnot(t=t_lift, theta_g=theta_changed, contact=False),
        skinsim.ProfileKnot(t=t_down, theta_g=theta_changed, contact=True),
    ]


def run_scenario(knots, mode: str, cfg: BalanceConfig | None = None, *,
                 gains: ControllerGains | None = None,
                 geom: skinsim.LegGeometry | None = None,
                 skin: skinsim.SkinParams | None = None,
                 estimator=None, flow_params: FlowParams | None = None,
                 seed: int = 0, duration: float | None = None,
                 progress=None) -> ControlTrace:
    """Drive the closed loop through a scenario profile at a fixed rate
    and return the full trace.  An empty profile yields an empty trace;
    ``duration`` defaults to six seconds past the last knot."""
    cfg = cfg or BalanceConfig()
    if not knots:
        empty = np.zeros(0)
        return ControlTrace(t=empty, theta_g_true=empty.copy(),
                            theta_f_true=empty.copy(),
                            theta_g_hat=empty.copy(),
                            theta_f_hat=empty.copy(), phi_ctrl=empty.copy(),
                            phi_ref=empty.copy(), duty=empty.copy(),
                            contact=np.zeros(0, dtype=bool), mode=mode)
    if duration is None:
        duration = knots[-1].t + 6.0
    sim = BalanceSim(mode, cfg, gains=gains, geom=geom, skin=skin,
                     estimator=estimator, flow_params=flow_params, seed=seed)
    n_ticks = int(round(duration * cfg.rate_hz))
    warned_leg_cmd = False
    rows = []
    for k in range(n_ticks):
        knot = skinsim.profile_at(knots, sim.t)
        if knot.theta_leg_cmd != "controlled" and not warned_leg_cmd:
            warnings.warn("profile theta_leg_cmd overrides are ignored by "
                          "the balance loop (the servo owns the leg)")
            warned_leg_cmd = True
        sim.set_plate_target(knot.theta_g)
        sim.set_contact(knot.contact)
        rows.append(sim.tick())
        if progress and (k + 1) % 200 == 0:
            progress(k + 1, n_ticks)
    tr = ControlTrace(
        t=np.asarray([r["t"] for r in rows]),
        theta_g_true=np.asarray([r["theta_g_true"] for r in rows]),
        theta_f_true=np.asarray([r["theta_f_true"] for r in rows]),
        theta_g_hat=np.asarray([r["theta_g_hat"] for r in rows]),
        theta_f_hat=np.asarray([r["theta_f_hat"] for r in rows]),
        phi_ctrl=np.asarray([r["phi_ctrl"] for r in rows]),
        phi_ref=np.asarray([r["phi_ref"] for r in rows]),
        duty=np.asarray([r["duty"] for r in rows]),
        contact=np.asarray([r["contact"] for r in rows], dtype=bool),
        mode=mode,
        unstable=sim.unstable, unstable_t=sim.unstable_t,
        unstable_reason=sim.unstable_reason,
        meta={"seed": int(seed), "duration": duration,
              "rate_hz": cfg.rate_hz})
    tr.validate()
    return tr
