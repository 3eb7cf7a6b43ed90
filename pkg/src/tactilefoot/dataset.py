"""Pose dataset: grid generation through the full sensing pipeline and a
simple binary container.

Each sample runs the whole chain once: scenario kinematics -> skin
deformation -> rendered frame -> dense flow against the undeformed
pattern -> canonical-unit scaling -> block-mean downsample to the
network input grid.  Targets are stored per sample as (theta_g,
theta_leg, theta_f); training consumes them ordered (theta_f, theta_g).

File format: magic b"TFDS", uint32 little-endian header length, UTF-8
JSON header, then per-sample blocks of little-endian float32: the three
angles followed by the field values.
"""

from __future__ import annotations

import json
import math
import struct
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from . import skinsim
from .optflow import dis_flow, downsample_field, generate_pattern
from .optflow.dis import FlowParams

MAGIC = b"TFDS"
FORMAT_VERSION = 1

# noise-seed indexes reserved beside the grid (grid indexes stay small)
_PATTERN_SEED_INDEX = 10 ** 9 + 1
_LABEL_SEED_INDEX = 10 ** 9 + 2


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class GenConfig:
    """Grid and raster settings for dataset generation.

    Angles sweep theta_g across the plate range used for data collection
    and theta_leg across the motor sweep.  The camera raster must tile
    the 80x60-patch sticker evenly; pixel-denominated flow is rescaled
    to the reference raster before downsampling, so datasets generated
    at different rasters feed the same network.
    """

    theta_g_start: float = -12.0
    theta_g_stop: float = 12.0
    theta_g_step: float = 1.0
    theta_leg_start: float = 40.0
    theta_leg_stop: float = 135.0
    theta_leg_step: float = 5.0
    cam_w: int = 160
    cam_h: int = 120
    net_h: int = 32
    net_w: int = 28
    patches_x: int = 80
    patches_y: int = 60
    candidates_k: int = 8
    label_noise: bool = False

    def __post_init__(self):
        if self.theta_g_step <= 0 or self.theta_leg_step <= 0:
            raise ValueError("grid steps must be positive")
        if self.theta_g_stop < self.theta_g_start:
            raise ValueError("theta_g range is reversed")
        if self.theta_leg_stop < self.theta_leg_start:
            raise ValueError("theta_leg range is reversed")
        px = self.cam_w // self.patches_x
        if px < 1 or self.cam_w != px * self.patches_x \
                or self.cam_h != px * self.patches_y:
            raise ValueError(
                f"camera raster {self.cam_w}x{self.cam_h} does not tile "
                f"{self.patches_x}x{self.patches_y} patches evenly")
        if self.net_h < 1 or self.net_w < 1:
            raise ValueError("net input dims must be positive")

    @property
    def patch_px(self):
        return self.cam_w // self.patches_x

    def grid(self):
        """(theta_g, theta_leg) pairs in row-major grid order."""
        def axis(start, stop, step):
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [start + k * step for k in range(n)]
        tgs = axis(self.theta_g_start, self.theta_g_stop, self.theta_g_step)
        tls = axis(self.theta_leg_start, self.theta_leg_stop, self.theta_leg_step)
        return [(tg, tl) for tg in tgs for tl in tls]


@dataclass
class Dataset:
    fields: np.ndarray   # (N, net_h, net_w, 2) float32, canonical px units
    theta_g: np.ndarray  # (N,) float32
    theta_leg: np.ndarray
    theta_f: np.ndarray
    meta: dict

    def __len__(self):
        return len(self.fields)

    def targets(self):
        """(N, 2) float64, ordered (theta_f, theta_g)."""
        return np.stack([self.theta_f, self.theta_g], axis=1).astype(np.float64)

    def take(self, idx):
        return Dataset(self.fields[idx], self.theta_g[idx],
                       self.theta_leg[idx], self.theta_f[idx], dict(self.meta))


def generate_dataset(cfg: GenConfig, seed, geom=None, skin=None,
                     flow_params=None, progress=None) -> Dataset:
    """Run the sensing pipeline over the whole grid, deterministically."""
    geom = geom or skinsim.LegGeometry()
    skin = skin or skinsim.SkinParams()
    flow_params = flow_params or FlowParams()
    pattern = generate_pattern(cfg.patches_x, cfg.patches_y, cfg.patch_px,
                               cfg.candidates_k,
                               skinsim.field_seed(seed, _PATTERN_SEED_INDEX))
    label_rng = np.random.default_rng(
        skinsim.field_seed(seed, _LABEL_SEED_INDEX))
    unit = skinsim.REFERENCE_WIDTH / cfg.cam_w
    grid = cfg.grid()
    n = len(grid)
    fields = np.empty((n, cfg.net_h, cfg.net_w, 2), dtype=np.float32)
    ang = np.empty((n, 3), dtype=np.float32)
    for i, (tg, tl) in enumerate(grid):
        tf = skinsim.foot_tilt(tg, tl, geom, skin)
        st = skinsim.ScenarioState(theta_g=tg, theta_leg=tl, theta_f=tf,
                                   contact=True)
        dfield = skinsim.deformation_field(st, geom, skin, cfg.cam_w,
                                           cfg.cam_h,
                                           skinsim.field_seed(seed, i))
        frame = skinsim.render_frame(pattern, dfield)
        flow = dis_flow(pattern, frame, flow_params) * unit
        fields[i] = downsample_field(flow, cfg.net_h, cfg.net_w)
        tf_label = tf + float(label_rng.uniform(-0.2, 0.2)) \
            if cfg.label_noise else tf
        ang[i] = (tg, tl, tf_label)
        if progress and (i + 1) % 50 == 0:
            progress(i + 1, n)
    meta = {
        "seed": int(seed),
        "gen": asdict(cfg),
        "geom": asdict(geom),
        "skin": asdict(skin),
        "flow": asdict(flow_params),
        "flow_units_px_at_width": skinsim.REFERENCE_WIDTH,
    }
    return Dataset(fields, ang[:, 0].copy(), ang[:, 1].copy(),
                   ang[:, 2].copy(), meta)


def save_dataset(path, ds: Dataset):
    n = len(ds)
    shape = list(ds.fields.shape[1:])
    header = {
        "format_version": FORMAT_VERSION,
        "count": n,
        "field_shape": shape,
        "sample_layout": ["theta_g", "theta_leg", "theta_f", "field"],
        "meta": ds.meta,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        for i in range(n):
            f.write(np.asarray([ds.theta_g[i], ds.theta_leg[i], ds.theta_f[i]],
                               dtype="<f4").tobytes())
            f.write(np.ascontiguousarray(ds.fields[i], dtype="<f4").tobytes())


def load_dataset(path) -> Dataset:
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != MAGIC:
        raise DatasetError(f"{path}: bad magic {data[:4]!r}")
    if len(data) < 8:
        raise DatasetError(f"{path}: truncated")
    (hlen,) = struct.unpack("<I", data[4:8])
    try:
        header = json.loads(data[8:8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DatasetError(f"{path}: unreadable header: {exc}") from exc
    if header.get("format_version") != FORMAT_VERSION:
        raise DatasetError(
            f"{path}: unsupported version {header.get('format_version')}")
    n = int(header["count"])
    shape = tuple(header["field_shape"])
    per = 3 + int(np.prod(shape))
    raw = data[8 + hlen:]
    if len(raw) != 4 * n * per:
        raise DatasetError(
            f"{path}: payload is {len(raw)} bytes, expected {4 * n * per}")
    body = np.frombuffer(raw, dtype="<f4")
    body = body.reshape(n, per)
    fields = np.ascontiguousarray(body[:, 3:].reshape((n,) + shape))
    return Dataset(fields, body[:, 0].copy(), body[:, 1].copy(),
                   body[:, 2].copy(), header.get("meta", {}))


def split(ds: Dataset, ratio, seed):
    """Deterministic shuffled split; the test side gets
    floor((1 - ratio) * N) samples."""
    if not (0.0 < ratio < 1.0):
        raise ValueError("ratio must be in (0, 1)")
    n = len(ds)
    # epsilon guards the floor against float artifacts like (1-0.8)*500
    n_test = int(math.floor((1.0 - ratio) * n + 1e-9))
    perm = np.random.default_rng(seed).permutation(n)
    train = ds.take(np.sort(perm[:n - n_test]))
    test = ds.take(np.sort(perm[n - n_test:]))
    if n_test == 0:
        warnings.warn("split produced an empty test side", stacklevel=2)
    if n - n_test == 0:
        warnings.warn("split produced an empty train side", stacklevel=2)
    return train, test
