"""Dense inverse-search optical flow.

Coarse-to-fine patch alignment: on every pyramid level, small square
patches are registered to the query image by inverse-compositional
Gauss-Newton steps, the sparse patch motions are blended into a dense
field weighted against each patch's final residual, and an optional
variational pass smooths the result before it seeds the next finer
level.  Iteration counts are fixed so runs are deterministic and both
kernel backends walk the same path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend as _backend
from . import _dis_np


@dataclass(frozen=True)
class FlowParams:
    pyramid_levels: int = 5
    patch_size: int = 8
    patch_stride: int = 4
    iterations_per_patch: int = 12
    variational_refinement: bool = True
    refine_iterations: int = 20
    smooth_weight: float = 8.0

    def __post_init__(self):
        if self.pyramid_levels < 1:
            raise ValueError("pyramid_levels must be >= 1")
        if self.patch_size < 2:
            raise ValueError("patch_size must be >= 2")
        if not (1 <= self.patch_stride <= self.patch_size):
            raise ValueError("patch_stride must be in [1, patch_size]")
        if self.iterations_per_patch < 1:
            raise ValueError("iterations_per_patch must be >= 1")
        if self.refine_iterations < 0:
            raise ValueError("refine_iterations must be >= 0")
        if self.smooth_weight <= 0:
            raise ValueError("smooth_weight must be > 0")


def grayscale(img):
    """uint8 RGB or gray -> float32 luma in [0, 1] (ITU-R 601 weights)."""
    a = np.asarray(img)
    if a.ndim == 3:
        a = (0.299 * a[:, :, 0].astype(np.float64)
             + 0.587 * a[:, :, 1].astype(np.float64)
             + 0.114 * a[:, :, 2].astype(np.float64))
    return (a / 255.0).astype(np.float32)


def _binomial5(img):
    """Separable 5-tap binomial smoothing with edge replication."""
    k = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0
    h, w = img.shape
    p = np.pad(img, ((2, 2), (0, 0)), mode="edge")
    out = sum(k[i] * p[i:i + h, :] for i in range(5))
    p = np.pad(out, ((0, 0), (2, 2)), mode="edge")
    return sum(k[i] * p[:, i:i + w] for i in range(5))


def build_pyramid(img, levels, min_size):
    """List of float32 images, [0] finest.  Every level is pre-smoothed
    (anti-aliasing; hard-edged marker patterns alias badly otherwise).
    Levels that would shrink a side below min_size are dropped."""
    pyr = [_binomial5(img.astype(np.float64)).astype(np.float32)]
    for _ in range(1, levels):
        prev = pyr[-1]
        h, w = prev.shape
        if h // 2 < min_size or w // 2 < min_size:
            break
        sm = _binomial5(prev.astype(np.float64))
        # 2x2 box mean; odd trailing row/col is dropped
        c = sm[: h // 2 * 2, : w // 2 * 2]
        nxt = 0.25 * (c[0::2, 0::2] + c[0::2, 1::2] + c[1::2, 0::2] + c[1::2, 1::2])
        pyr.append(nxt.astype(np.float32))
    return pyr


def patch_grid(h, w, patch, stride):
    """Top-left corners covering the image, last row/col edge-aligned."""
    xs = list(range(0, w - patch + 1, stride))
    if xs[-1] != w - patch:
        xs.append(w - patch)
    ys = list(range(0, h - patch + 1, stride))
    if ys[-1] != h - patch:
        ys.append(h - patch)
    gx, gy = np.meshgrid(np.asarray(xs, dtype=np.int64),
                         np.asarray(ys, dtype=np.int64))
    return gx.ravel(), gy.ravel()


def _resize_flow(flow, h, w):
    """Bilinear resize of a flow field with value rescaling for the new
    raster (doubling the raster doubles the displacement)."""
    fh, fw = flow.shape[:2]
    ys = (np.arange(h, dtype=np.float64) + 0.5) * fh / h - 0.5
    xs = (np.arange(w, dtype=np.float64) + 0.5) * fw / w - 0.5
    gx, gy = np.meshgrid(xs, ys)
    u = _dis_np._bilinear(flow[:, :, 0], gx, gy) * (w / fw)
    v = _dis_np._bilinear(flow[:, :, 1], gx, gy) * (h / fh)
    return np.stack([u, v], axis=2).astype(np.float32)


def dis_flow(ref_img, qry_img, params=None, backend=None):
    """Dense flow from ref to query; float32 (H, W, 2), x-component first.

    Accepts uint8 images (RGB or gray) of equal shape.  `backend` picks
    the kernel set ("numpy"/"cython"), default whatever is active.
    """
    if params is None:
        params = FlowParams()
    impl, _ = _backend.get_backend(backend)
    ref = grayscale(ref_img)
    qry = grayscale(qry_img)
    if ref.shape != qry.shape:
        raise ValueError("image shapes differ")
    ps = params.patch_size
    rp = build_pyramid(ref, params.pyramid_levels, ps)
    qp = build_pyramid(qry, params.pyramid_levels, ps)
    flow = None
    for lvl in range(len(rp) - 1, -1, -1):
        r = rp[lvl]
        q = qp[lvl]
        h, w = r.shape
        if flow is None:
            flow = np.zeros((h, w, 2), dtype=np.float32)
        else:
            flow = _resize_flow(flow, h, w)
        x0s, y0s = patch_grid(h, w, ps, params.patch_stride)
        cx = np.minimum(x0s + ps // 2, w - 1)
        cy = np.minimum(y0s + ps // 2, h - 1)
        uv = flow[cy, cx, :].astype(np.float32)
        gx, gy = _dis_np.level_gradients(r)
        uv, res = impl.patch_inverse_search(r, q, gx, gy, x0s, y0s, uv,
                                            ps, params.iterations_per_patch)
        flow = impl.densify(uv, res, x0s, y0s, ps, h, w)
        if params.variational_refinement and params.refine_iterations > 0:
            flow = impl.variational_refine(flow, r, q, params.smooth_weight,
                                           params.refine_iterations)
    return flow


def downsample_field(field, out_h, out_w):
    """Block-mean a (H, W, C) field to (out_h, out_w, C).  Partition
    boundaries at floor(i * H / out_h), so sizes need not divide."""
    h, w = field.shape[:2]
    if not (1 <= out_h <= h and 1 <= out_w <= w):
        raise ValueError("output size must be between 1 and the input size")
    yb = (np.arange(out_h + 1) * h) // out_h
    xb = (np.arange(out_w + 1) * w) // out_w
    f = np.asarray(field, dtype=np.float64).reshape(h, w, -1)
    rows = np.add.reduceat(f, yb[:-1], axis=0)
    blocks = np.add.reduceat(rows, xb[:-1], axis=1)
    areas = ((yb[1:] - yb[:-1])[:, None] * (xb[1:] - xb[:-1])[None, :]).astype(np.float64)
    out = blocks / areas[:, :, None]
    return out.reshape((out_h, out_w) + field.shape[2:]).astype(np.float32)
