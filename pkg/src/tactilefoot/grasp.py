"""Friction-cone contact-phase classification and the grasp-force
controller, driven by a simulated two-finger gripper.

The plant is quasi-static Coulomb contact: each finger's normal force
comes from the squeeze stiffness, the hung load splits evenly across the
fingers while both stick, a finger whose share exceeds its static
capacity slides at the kinetic level and sheds the remainder onto the
other finger, and the object slides once both fingers are kinetic.  The
controller watches the tangential/normal ratio of both fingers against
a nominal friction cone with a hysteresis band: both above the band
tightens the grip one step, both below loosens it one step, anything
mixed holds (the conservative strategy).

The friction coefficient is load-dependent (affine in the normal force)
and the kinetic level sits a fixed factor below the static one, so the
nominal cone the controller uses is an average over the working range,
not the local truth; sustained ratio crossovers with the controller off
are exactly the gap between the two.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field as dc_field
from enum import Enum

import numpy as np

G = 9.81  # m/s^2

GRIPPER_RANGE_MM = (0.0, 140.0)

EPS_FN = 1e-9        # below this normal force the ratio is undefined
EPS_SLIP = 0.5       # ratio drop rate (1/s) read as shear slip


class GraspError(ValueError):
    pass


class BrokenContact(GraspError):
    """At least one finger lost the object (normal force ~ zero)."""


class ContactPhase(str, Enum):
    STABLE = "stable"
    INCIPIENT = "incipient"
    SLIPPING = "slipping"
    RECOVERY = "recovery"


# classify_phase result for an undefined ratio; deliberately not a phase
CONTACT_BROKEN = "broken"


@dataclass
class ContactWrench:
    """Per-finger contact force in the sensor frame: tangential along x,
    normal along z."""

    f: tuple
    f_n: float
    f_t: float

    def __post_init__(self):
        if self.f_n < 0:
            raise GraspError(f"normal force must be >= 0, got {self.f_n}")

    @classmethod
    def from_forces(cls, f_t: float, f_n: float) -> "ContactWrench":
        return cls(f=(f_t, 0.0, f_n), f_n=f_n, f_t=f_t)

    @property
    def ratio(self):
        """Tangential/normal ratio, or None when the contact carries no
        normal force."""
        if self.f_n <= EPS_FN:
            return None
        return self.f_t / self.f_n


@dataclass
class FrictionModel:
    """Affine load-dependent static friction with a proportional kinetic
    level below it."""

    mu_static_0: float = 1.2
    mu_slope: float = -0.1      # per newton of normal force
    mu_kinetic_ratio: float = 0.85

    def __post_init__(self):
        if not 0.0 < self.mu_kinetic_ratio < 1.0:
            raise GraspError(
                f"mu_kinetic_ratio must be in (0, 1), got {self.mu_kinetic_ratio}")

    def mu_s(self, f_n: float) -> float:
        return self.mu_static_0 + self.mu_slope * f_n

    def mu_k(self, f_n: float) -> float:
        return self.mu_kinetic_ratio * self.mu_s(f_n)


def nominal_mu(model: FrictionModel, fn_range) -> float:
    """Mean static coefficient over the working range (closed form for
    the affine model); a collapsed range evaluates at the point."""
    lo, hi = float(fn_range[0]), float(fn_range[1])
    if hi < lo:
        raise GraspError(f"friction working range is empty: [{lo}, {hi}]")
    if model.mu_s(lo) <= 0 or model.mu_s(hi) <= 0:
        raise GraspError(
            f"static friction not positive over [{lo}, {hi}] N")
    return model.mu_static_0 + model.mu_slope * (lo + hi) / 2.0


def classify_phase(prev, ratio, dratio_dt: float, mu: float, d: float,
                   eps_slip: float = EPS_SLIP):
    """Hysteresis phase machine over the friction-cone band.

    ``prev`` is the previous phase (or CONTACT_BROKEN / None at start,
    treated as Stable history).  An undefined ratio reports
    CONTACT_BROKEN rather than a phase.
    """
    if d <= 0:
        raise GraspError(f"band width d must be positive, got {d}")
    if ratio is None:
        return CONTACT_BROKEN
    lo = mu - d / 2.0
    hi = mu + d / 2.0
    if ratio > hi:
        return ContactPhase.SLIPPING
    if prev == ContactPhase.SLIPPING:
        # back inside the cone estimate: being regulated
        return ContactPhase.RECOVERY
    if prev == ContactPhase.RECOVERY:
        return ContactPhase.STABLE if ratio < lo else ContactPhase.RECOVERY
    if ratio < lo:
        if prev == ContactPhase.INCIPIENT and dratio_dt < -eps_slip:
            # fast drop out of the band: the contact yielded
            return ContactPhase.SLIPPING
        return ContactPhase.STABLE
    return ContactPhase.INCIPIENT


def grip_controller_step(f_l: ContactWrench, f_r: ContactWrench, d_g: float,
                         d: float, mu: float) -> float:
    """One controller tick: opening command from the two force ratios.
    Tightens a step when both fingers sit above the band, loosens a step
    when both sit below, otherwise holds; clamps to the mechanical
    range."""
    r_l = f_l.ratio
    r_r = f_r.ratio
    if r_l is None or r_r is None:
        raise BrokenContact(
            f"contact broken (f_n left={f_l.f_n}, right={f_r.f_n})")
    lo = mu - d / 2.0
    hi = mu + d / 2.0
    if r_l > hi and r_r > hi:
        d_r = d_g - 1.0
    elif r_l < lo and r_r < lo:
        d_r = d_g + 1.0
    else:
        d_r = d_g
    return min(max(d_r, GRIPPER_RANGE_MM[0]), GRIPPER_RANGE_MM[1])


@dataclass
class GraspPlant:
    """Two-finger squeeze plant and object parameters."""

    k_g: float = 0.06          # N of normal force per mm of squeeze
    d_contact: float = 80.0    # opening at first finger contact, mm
    d_g0: float = 60.0         # initial opening, mm
    object_mass: float = 0.2   # kg, always hanging on the contact
    asym: float = 1.0          # right/left normal-force gain mismatch
    fn_working: tuple = (0.3, 5.0)  # range the nominal cone averages over
    slide_mobility: float = 5.0     # mm/s of slide per newton of deficit
    slide_limit: float = 10.0       # mm of slide that ends the grasp
    gripper_mms: float = 50.0       # opening slew toward the command
    rate_hz: float = 50.0
    band_d: float = 0.1        # friction-cone band width (config default)

    def __post_init__(self):
        if self.k_g <= 0 or self.rate_hz <= 0 or self.gripper_mms <= 0:
            raise GraspError("k_g, rate_hz and gripper_mms must be positive")
        if not GRIPPER_RANGE_MM[0] <= self.d_g0 <= GRIPPER_RANGE_MM[1]:
            raise GraspError(f"d_g0 outside mechanical range: {self.d_g0}")
        if self.object_mass <= 0 or self.asym <= 0:
            raise GraspError("object_mass and asym must be positive")
        if self.band_d <= 0:
            raise GraspError("band_d must be positive")


@dataclass
class LoadKnot:
    """Added mass hanging from the object from time t on."""

    t: float
    added_mass: float


def load_schedule(path) -> list[LoadKnot]:
    """Parse a load schedule JSON file (list of {t, added_mass})."""
    with open(path) as f:
        text = f.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraspError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    return parse_schedule(raw, origin=str(path))


def parse_schedule(raw, origin="schedule") -> list[LoadKnot]:
    if not isinstance(raw, list):
        raise GraspError(
            f"{origin}: expected a list of knots, got {type(raw).__name__}")
    knots = []
    prev_t = -math.inf
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise GraspError(f"{origin}: entry {i}: expected an object")
        try:
            t = float(entry["t"])
            m = float(entry["added_mass"])
        except KeyError as exc:
            raise GraspError(f"{origin}: entry {i}: missing key {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise GraspError(f"{origin}: entry {i}: {exc}") from exc
        if m < 0:
            raise GraspError(f"{origin}: entry {i}: added_mass must be >= 0")
        if t < prev_t:
            raise GraspError(f"{origin}: entry {i}: time {t} goes backwards")
        prev_t = t
        knots.append(LoadKnot(t=t, added_mass=m))
    return knots


def staircase_schedule(total_mass: float, *, t_start: float = 2.0,
                       n_steps: int = 5, step_dt: float = 0.2,
                       t_unload: float = 7.0) -> list[LoadKnot]:
    """Hang ``total_mass`` in equal increments (one weight at a time),
    hold, then remove it all at ``t_unload``."""
    if n_steps < 1:
        raise GraspError("n_steps must be >= 1")
    knots = [LoadKnot(0.0, 0.0)]
    for i in range(1, n_steps + 1):
        knots.append(LoadKnot(t_start + (i - 1) * step_dt,
                              total_mass * i / n_steps))
    knots.append(LoadKnot(t_unload, 0.0))
    return knots


def mass_at(knots: list[LoadKnot], t: float) -> float:
    m = 0.0
    for k in knots:
        if k.t <= t:
            m = k.added_mass
        else:
            break
    return m


_COLUMNS = ("t", "fl_t", "fl_n", "fr_t", "fr_n", "ratio_l", "ratio_r",
            "phase_l", "phase_r", "D_g", "slide", "intact")


@dataclass
class GraspTrace:
    t: np.ndarray
    fl_t: np.ndarray
    fl_n: np.ndarray
    fr_t: np.ndarray
    fr_n: np.ndarray
    ratio_l: np.ndarray   # NaN where undefined
    ratio_r: np.ndarray
    phase_l: list
    phase_r: list
    d_g: np.ndarray
    slide: np.ndarray
    intact: np.ndarray    # bool, latched False on failure
    meta: dict = dc_field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def grasp_intact(self) -> bool:
        return bool(self.intact[-1]) if len(self.intact) else True

    def crossover_seconds(self, mu: float, d: float) -> float:
        """Total time either finger's ratio sits above the cone band."""
        hi = mu + d / 2.0
        over = np.zeros(len(self.t), dtype=bool)
        for r in (self.ratio_l, self.ratio_r):
            with np.errstate(invalid="ignore"):
                over |= np.nan_to_num(r, nan=-np.inf) > hi
        if len(self.t) < 2:
            return float(over.sum())
        dt = float(self.t[1] - self.t[0])
        return float(over.sum()) * dt

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(_COLUMNS)
            for i in range(len(self.t)):
                w.writerow([
                    f"{self.t[i]:.6f}", f"{self.fl_t[i]:.6f}",
                    f"{self.fl_n[i]:.6f}", f"{self.fr_t[i]:.6f}",
                    f"{self.fr_n[i]:.6f}", f"{self.ratio_l[i]:.6f}",
                    f"{self.ratio_r[i]:.6f}", self.phase_l[i],
                    self.phase_r[i], f"{self.d_g[i]:.6f}",
                    f"{self.slide[i]:.6f}", int(self.intact[i]),
                ])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        if not rows or tuple(rows[0]) != _COLUMNS:
            raise GraspError(f"{path}: not a grasp trace (bad header)")
        body = rows[1:]
        num = {k: [] for k in _COLUMNS if k not in ("phase_l", "phase_r")}
        pl, pr = [], []
        for r in body:
            rec = dict(zip(_COLUMNS, r))
            for k in num:
                num[k].append(float(rec[k]))
            pl.append(rec["phase_l"])
            pr.append(rec["phase_r"])
        a = {k: np.asarray(v) for k, v in num.items()}
        return cls(t=a["t"], fl_t=a["fl_t"], fl_n=a["fl_n"], fr_t=a["fr_t"],
                   fr_n=a["fr_n"], ratio_l=a["ratio_l"], ratio_r=a["ratio_r"],
                   phase_l=pl, phase_r=pr, d_g=a["D_g"], slide=a["slide"],
                   intact=a["intact"].astype(bool))


def _tangential_split(load: float, fn_l: float, fn_r: float,
                      model: FrictionModel):
    """Quasi-static Coulomb assignment of the hung load to two fingers.

    Returns (ft_l, ft_r, slip_l, slip_r, both_kinetic).  Stateless per
    tick: try both stuck at an even split, shed a finger over capacity
    to its kinetic level with the remainder on the other, fall back to
    both kinetic (the object is sliding).
    """
    cap_s_l = model.mu_s(fn_l) * fn_l
    cap_s_r = model.mu_s(fn_r) * fn_r
    cap_k_l = model.mu_k(fn_l) * fn_l
    cap_k_r = model.mu_k(fn_r) * fn_r
    half = load / 2.0
    if half <= cap_s_l and half <= cap_s_r:
        return half, half, False, False, False
    if half > cap_s_l and load - cap_k_l <= cap_s_r:
        return cap_k_l, load - cap_k_l, True, False, False
    if half > cap_s_r and load - cap_k_r <= cap_s_l:
        return load - cap_k_r, cap_k_r, False, True, False
    return cap_k_l, cap_k_r, True, True, True


class GraspSim:
    """Tickable two-finger stick-slip plant with the grip controller in
    or out of the loop.  Each tick takes the currently hung added mass
    and returns one trace row."""

    def __init__(self, model: FrictionModel | None = None,
                 plant: GraspPlant | None = None, *,
                 controller_on: bool = True):
        self.model = model or FrictionModel()
        self.plant = plant or GraspPlant()
        self.controller_on = controller_on
        self.mu = nominal_mu(self.model, self.plant.fn_working)
        self.dt = 1.0 / self.plant.rate_hz
        self.reset()

    def reset(self):
        self.tick_index = 0
        self.d_g = self.plant.d_g0
        self._d_r = self.plant.d_g0
        self.slide = 0.0
        self.intact = True
        self._dropped = False
        self._prev_phase_l = None
        self._prev_phase_r = None
        self._prev_ratio_l = None
        self._prev_ratio_r = None

    def tick(self, added_mass: float = 0.0) -> dict:
        model, plant, d = self.model, self.plant, self.plant.band_d
        t = self.tick_index * self.dt
        load = (plant.object_mass + added_mass) * G

        squeeze = max(0.0, plant.d_contact - self.d_g)
        fn_l = plant.k_g * squeeze
        fn_r = plant.asym * plant.k_g * squeeze
        if self._dropped:
            fn_l = fn_r = 0.0

        if fn_l <= EPS_FN or fn_r <= EPS_FN:
            ft_l = ft_r = 0.0
            both_kinetic = False
            self.intact = False
        else:
            ft_l, ft_r, _, _, both_kinetic = _tangential_split(
                load, fn_l, fn_r, model)

        if both_kinetic:
            deficit = max(0.0, load - ft_l - ft_r)
            self.slide += plant.slide_mobility * deficit * self.dt
            if self.slide > plant.slide_limit:
                self.intact = False
                self._dropped = True

        w_l = ContactWrench.from_forces(ft_l, fn_l)
        w_r = ContactWrench.from_forces(ft_r, fn_r)
        r_l = w_l.ratio
        r_r = w_r.ratio
        dr_l = 0.0 if (r_l is None or self._prev_ratio_l is None) \
            else (r_l - self._prev_ratio_l) / self.dt
        dr_r = 0.0 if (r_r is None or self._prev_ratio_r is None) \
            else (r_r - self._prev_ratio_r) / self.dt
        phase_l = classify_phase(self._prev_phase_l, r_l, dr_l, self.mu, d)
        phase_r = classify_phase(self._prev_phase_r, r_r, dr_r, self.mu, d)

        row = {
            "t": t, "fl_t": ft_l, "fl_n": fn_l, "fr_t": ft_r, "fr_n": fn_r,
            "ratio_l": float("nan") if r_l is None else r_l,
            "ratio_r": float("nan") if r_r is None else r_r,
            "phase_l": phase_l.value if isinstance(phase_l, ContactPhase)
            else phase_l,
            "phase_r": phase_r.value if isinstance(phase_r, ContactPhase)
            else phase_r,
            "d_g": self.d_g, "slide": self.slide, "intact": self.intact,
        }

        if self.controller_on:
            try:
                self._d_r = grip_controller_step(w_l, w_r, self.d_g, d,
                                                 self.mu)
            except BrokenContact:
                self.intact = False
        else:
            self._d_r = self.d_g
        step = plant.gripper_mms * self.dt
        move = min(max(self._d_r - self.d_g, -step), step)
        self.d_g = min(max(self.d_g + move, GRIPPER_RANGE_MM[0]),
                       GRIPPER_RANGE_MM[1])

        self._prev_phase_l = phase_l
        self._prev_phase_r = phase_r
        self._prev_ratio_l = r_l
        self._prev_ratio_r = r_r
        self.tick_index += 1
        return row


def simulate_grasp(schedule, controller_on: bool,
                   model: FrictionModel | None = None,
                   plant: GraspPlant | None = None, *,
                   duration: float | None = None,
                   progress=None) -> GraspTrace:
    """Run the two-finger stick-slip plant under a load schedule at a
    fixed rate, with or without the grip controller in the loop."""
    if isinstance(schedule, (str,)) or hasattr(schedule, "read"):
        raise TypeError("pass a parsed schedule (list of LoadKnot)")
    knots = list(schedule)
    if duration is None:
        duration = (knots[-1].t if knots else 0.0) + 4.0
    sim = GraspSim(model, plant, controller_on=controller_on)
    n_ticks = int(round(duration * sim.plant.rate_hz))

    cols = {k: [] for k in ("t", "fl_t", "fl_n", "fr_t", "fr_n", "ratio_l",
                            "ratio_r", "d_g", "slide", "intact")}
    phases_l, phases_r = [], []
    for k in range(n_ticks):
        row = sim.tick(mass_at(knots, k * sim.dt))
        for key in cols:
            cols[key].append(row[key])
        phases_l.append(row["phase_l"])
        phases_r.append(row["phase_r"])
        if progress and (k + 1) % 500 == 0:
            progress(k + 1, n_ticks)

    return GraspTrace(
        t=np.asarray(cols["t"]), fl_t=np.asarray(cols["fl_t"]),
        fl_n=np.asarray(cols["fl_n"]), fr_t=np.asarray(cols["fr_t"]),
        fr_n=np.asarray(cols["fr_n"]), ratio_l=np.asarray(cols["ratio_l"]),
        ratio_r=np.asarray(cols["ratio_r"]), phase_l=phases_l,
        phase_r=phases_r, d_g=np.asarray(cols["d_g"]),
        slide=np.asarray(cols["slide"]),
        intact=np.asarray(cols["intact"], dtype=bool),
        meta={"controller_on": controller_on, "mu_nominal": sim.mu,
              "band_d": sim.plant.band_d, "duration": duration})
