"""Synthetic tactile-skin simulator.

Generates ground-truth scenario kinematics and a deterministic skin
deformation field for any (ground tilt, leg angle) pair, plus rendered
camera frames of the deformed color pattern.  Stands in for the physical
elastomer: the deformation model is a shear term driven by the ground
slope plus a radial spread centered at the center of pressure, with
optional per-pixel sensor noise.

Conventions
-----------
* All angles are degrees at every public boundary.
* Displacement fields are float32 arrays of shape (H, W, 2); channel 0 is
  the horizontal component u (px, +right), channel 1 the vertical v (px,
  +down).  Pattern images are uint8 arrays of shape (H, W, 3), RGB.
* Pixel-denominated skin parameters (shear gain, spread radius, noise,
  footprint) are defined at the reference camera raster of width
  REFERENCE_WIDTH and are rescaled internally when a field is evaluated
  at a different raster, so a low-resolution camera sees the same
  physical skin.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

G = 9.81  # m/s^2

# Camera raster at which pixel-denominated skin parameters are defined.
REFERENCE_WIDTH = 640
REFERENCE_HEIGHT = 480


class ProfileError(ValueError):
    """Raised for malformed scenario profile files; carries location info."""


@dataclass
class ScenarioState:
    """Kinematic snapshot of the foot-on-plate scenario (angles in degrees)."""

    theta_g: float = 0.0   # ground plate tilt, + backward
    theta_leg: float = 90.0  # leg angle measured from the plate, 90 = normal
    theta_f: float = 0.0   # foot / camera-frame tilt
    contact: bool = True
    t: float = 0.0

    # Demonstrated plate range; the training grid is narrower (-12..12).
    PLATE_RANGE = (-20.0, 30.0)


@dataclass
class LegGeometry:
    """Leg dimensions. L and mass follow the physical build; l and L_com
    are documented defaults (not independently measured)."""

    L: float = 0.22      # leg length, m
    l: float = 0.03      # motor shaft offset from the support bisector, m
    L_com: float = 0.11  # COM distance along the leg, m
    mass: float = 0.04   # counterweight-dominated leg mass, kg

    def __post_init__(self):
        # l = 0 is a degenerate but well-defined build (motor on the
        # support bisector); the offset may not reach the leg length.
        if not 0 <= self.l < self.L:
            raise ValueError(f"need 0 <= l < L, got l={self.l}, L={self.L}")
        if self.mass <= 0:
            raise ValueError(f"mass must be positive, got {self.mass}")


@dataclass
class SkinParams:
    """Deformation-model parameters, px-denominated ones at the reference raster.

    k_f is a compliance guess: the real foot-vs-ground discrepancy was
    never quantified, so the default is chosen to stay near one degree at
    the extremes of the leg sweep.
    """

    k_s: float = 12.0          # px of shear per unit sin(theta_g)
    k_r: float = 0.05          # radial spread gain, dimensionless
    sigma_r: float = 90.0      # spread radius, px
    k_f: float = 30.0          # foot compliance, deg per N*m of COM moment
    sigma_noise: float = 0.05  # per-pixel Gaussian noise, px
    footprint_halfwidth: float = 240.0  # COP clamp, px
    cop_gain: float = 1500.0   # COP offset per meter of COM lever arm, px/m

    def __post_init__(self):
        for name in ("k_s", "k_r", "k_f", "sigma_noise", "footprint_halfwidth", "cop_gain"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.sigma_r <= 0:
            raise ValueError("sigma_r must be positive")


def foot_tilt(theta_g, theta_leg, geom: LegGeometry, params: SkinParams) -> float:
    """Foot tilt under contact: ground tilt plus compliance times the
    gravity moment of the leg COM about the ankle (degrees in, degrees out)."""
    moment = geom.mass * G * geom.L_com * math.sin(math.radians(theta_g + theta_leg - 90.0))
    return theta_g + params.k_f * moment


def cop_offset_px(theta_g, theta_leg, geom: LegGeometry, params: SkinParams) -> float:
    """Center-of-pressure offset from the pattern center along x, in
    reference-raster px, clamped to the footprint."""
    raw = params.cop_gain * geom.L_com * math.sin(math.radians(theta_g + theta_leg - 90.0))
    return float(np.clip(raw, -params.footprint_halfwidth, params.footprint_halfwidth))


def deformation_field(state: ScenarioState, geom: LegGeometry, params: SkinParams,
                      width: int, height: int, seed: int) -> np.ndarray:
    """Synthesize the skin displacement field for one scenario snapshot.

    Deterministic given (state, seed).  In contact the field is a uniform
    shear along x plus a Gaussian-weighted radial spread away from the
    center of pressure; out of contact only the zero-mean pixel noise
    remains.  Returns float32 (height, width, 2) in px of this raster.
    """
    if width <= 0 or height <= 0:
        raise ValueError(f"field dims must be positive, got {width}x{height}")
    scale = width / REFERENCE_WIDTH
    out = np.zeros((height, width, 2), dtype=np.float32)

    if state.contact:
        shear = params.k_s * scale * math.sin(math.radians(state.theta_g))
        xc = (width - 1) / 2.0
        yc = (height - 1) / 2.0
        cop_x = cop_offset_px(state.theta_g, state.theta_leg, geom, params) * scale
        xs = np.arange(width, dtype=np.float32) - xc - cop_x
        ys = np.arange(height, dtype=np.float32) - yc
        dx = np.broadcast_to(xs[None, :], (height, width))
        dy = np.broadcast_to(ys[:, None], (height, width))
        sigma = params.sigma_r * scale
        w = np.exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma))
        out[:, :, 0] = shear + params.k_r * w * dx
        out[:, :, 1] = params.k_r * w * dy

    if params.sigma_noise > 0:
        rng = np.random.default_rng(seed)
        out += rng.normal(0.0, params.sigma_noise * scale,
                          size=(height, width, 2)).astype(np.float32)
    return out


def render_frame(pattern: np.ndarray, field: np.ndarray) -> np.ndarray:
    """Render the camera view of the deformed pattern.

    Inverse bilinear warp: output(x) = pattern(x - u(x)).  Out-of-bounds
    samples clamp to the edge.  Rounds to uint8 with banker's-free
    round-half-away semantics via np.rint on the +0.0 biased value.
    """
    if pattern.ndim != 3 or pattern.shape[2] != 3:
        raise ValueError(f"pattern must be (H, W, 3), got {pattern.shape}")
    if field.shape[:2] != pattern.shape[:2] or field.shape[2] != 2:
        raise ValueError(
            f"field dims {field.shape} do not match pattern {pattern.shape}")
    h, w = pattern.shape[:2]
    ys, xs = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    sx = np.clip(xs - field[:, :, 0], 0.0, w - 1.0)
    sy = np.clip(ys - field[:, :, 1], 0.0, h - 1.0)
    x0 = np.floor(sx).astype(np.intp)
    y0 = np.floor(sy).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (sx - x0)[..., None]
    fy = (sy - y0)[..., None]
    img = pattern.astype(np.float64)
    top = img[y0, x0] * (1 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1 - fx) + img[y1, x1] * fx
    return np.clip(np.rint(top * (1 - fy) + bot * fy), 0, 255).astype(np.uint8)


def field_seed(base_seed: int, index: int) -> int:
    """Stable per-sample / per-tick noise seed derived from a base seed."""
    ss = np.random.SeedSequence([int(base_seed), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] % (2**63))


@dataclass
class ProfileKnot:
    """One entry of a scenario profile: targets that hold from time t."""

    t: float
    theta_g: float
    theta_leg_cmd: float | str = "controlled"  # degrees, or "controlled"
    contact: bool = True


def load_profile(path) -> list[ProfileKnot]:
    """Parse a scenario profile JSON file (ordered list of knots).

    Reports JSON syntax errors with their line number and semantic errors
    with the offending entry index.
    """
    with open(path) as f:
        text = f.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    return parse_profile(raw, origin=str(path))


def parse_profile(raw, origin="profile") -> list[ProfileKnot]:
    if not isinstance(raw, list):
        raise ProfileError(f"{origin}: expected a list of knots, got {type(raw).__name__}")
    knots = []
    prev_t = -math.inf
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise ProfileError(f"{origin}: entry {i}: expected an object")
        try:
            t = float(entry["t"])
            theta_g = float(entry["theta_g"])
        except KeyError as exc:
            raise ProfileError(f"{origin}: entry {i}: missing key {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ProfileError(f"{origin}: entry {i}: {exc}") from exc
        cmd = entry.get("theta_leg_cmd", "controlled")
        if cmd != "controlled":
            try:
                cmd = float(cmd)
            except (TypeError, ValueError) as exc:
                raise ProfileError(
                    f"{origin}: entry {i}: theta_leg_cmd must be a number "
                    f"or \"controlled\", got {cmd!r}") from exc
        contact = entry.get("contact", True)
        if not isinstance(contact, bool):
            raise ProfileError(f"{origin}: entry {i}: contact must be boolean")
        if t < prev_t:
            raise ProfileError(f"{origin}: entry {i}: time {t} goes backwards")
        prev_t = t
        knots.append(ProfileKnot(t=t, theta_g=theta_g, theta_leg_cmd=cmd, contact=contact))
    return knots


def profile_at(knots: list[ProfileKnot], t: float) -> ProfileKnot:
    """Knot in effect at time t (the last knot with knot.t <= t)."""
    if not knots:
        raise ProfileError("empty profile")
    current = knots[0]
    for k in knots:
        if k.t <= t:
            current = k
        else:
            break
    return current
