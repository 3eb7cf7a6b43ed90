"""Pure numpy flow kernels: the fallback backend.

Same contracts as the compiled module `_dis_cy`; both run fixed iteration
counts with identical guards so the backends stay numerically close
(float32 images, float64 accumulators).
"""

from __future__ import annotations

import numpy as np


def patch_inverse_search(ref, qry, gx, gy, x0s, y0s, uv, patch, iters):
    """Inverse-compositional Gauss-Newton alignment of every patch.

    ref/qry: float32 level images.  gx/gy: reference gradients.  x0s/y0s:
    patch top-left corners (int64).  uv: (N, 2) float32 initial flow,
    not modified.  Returns (uv_out, residual) where residual is the mean
    absolute patch difference at the returned flow.  A patch whose final
    position matches worse than its initialization keeps the
    initialization; this stops wandering onto look-alike texture.
    """
    h, w = ref.shape
    n = len(x0s)
    ps = patch
    dj, di = np.meshgrid(np.arange(ps), np.arange(ps))
    dj = dj.ravel()
    di = di.ravel()
    idx = (y0s[:, None] + di[None, :]) * w + (x0s[:, None] + dj[None, :])
    t = ref.ravel()[idx].astype(np.float64)
    gxt = gx.ravel()[idx].astype(np.float64)
    gyt = gy.ravel()[idx].astype(np.float64)

    sxx = (gxt * gxt).sum(axis=1)
    sxy = (gxt * gyt).sum(axis=1)
    syy = (gyt * gyt).sum(axis=1)
    det = sxx * syy - sxy * sxy
    bad = det < 1e-10
    det = np.where(bad, 1.0, det)
    ih00 = syy / det
    ih01 = -sxy / det
    ih11 = sxx / det

    u = uv[:, 0].astype(np.float64).copy()
    v = uv[:, 1].astype(np.float64).copy()
    u0 = u.copy()
    v0 = v.copy()
    active = ~bad
    base_x = (x0s[:, None] + dj[None, :]).astype(np.float64)
    base_y = (y0s[:, None] + di[None, :]).astype(np.float64)

    q0 = _bilinear(qry, base_x + u0[:, None], base_y + v0[:, None])
    res0 = np.abs(q0 - t).mean(axis=1)

    for _ in range(iters):
        if not active.any():
            break
        q = _bilinear(qry, base_x + u[:, None], base_y + v[:, None])
        e = q - t
        bx = (gxt * e).sum(axis=1)
        by = (gyt * e).sum(axis=1)
        du = ih00 * bx + ih01 * by
        dv = ih01 * bx + ih11 * by
        u = np.where(active, u - du, u)
        v = np.where(active, v - dv, v)
        lost = active & ((np.abs(u - u0) > ps) | (np.abs(v - v0) > ps)
                         | ~np.isfinite(u) | ~np.isfinite(v))
        u = np.where(lost, u0, u)
        v = np.where(lost, v0, v)
        active = active & ~lost

    broken = bad | ~np.isfinite(u) | ~np.isfinite(v)
    u = np.where(broken, u0, u)
    v = np.where(broken, v0, v)
    q = _bilinear(qry, base_x + u[:, None], base_y + v[:, None])
    res = np.abs(q - t).mean(axis=1)
    worse = res > res0
    u = np.where(worse, u0, u)
    v = np.where(worse, v0, v)
    res = np.where(worse, res0, res)
    out = np.stack([u, v], axis=1).astype(np.float32)
    return out, res.astype(np.float64)


def densify(uv, res, x0s, y0s, patch, h, w):
    """Dense flow by residual-weighted averaging of overlapping patches."""
    num = np.zeros((h, w, 2), dtype=np.float64)
    den = np.zeros((h, w), dtype=np.float64)
    for p in range(len(x0s)):
        wt = 1.0 / (1e-3 + res[p])
        x0, y0 = x0s[p], y0s[p]
        num[y0:y0 + patch, x0:x0 + patch, 0] += wt * uv[p, 0]
        num[y0:y0 + patch, x0:x0 + patch, 1] += wt * uv[p, 1]
        den[y0:y0 + patch, x0:x0 + patch] += wt
    den = np.where(den > 0, den, 1.0)
    return (num / den[:, :, None]).astype(np.float32)


def variational_refine(flow, ref, qry, alpha, iters):
    """Horn-Schunck style smoothing: quadratic data term linearized at the
    incoming flow, Jacobi sweeps with edge-replicated neighbor means."""
    u0 = flow[:, :, 0].astype(np.float64)
    v0 = flow[:, :, 1].astype(np.float64)
    warped = warp_gray(qry, flow).astype(np.float64)
    e0 = warped - ref.astype(np.float64)
    ix, iy = _central_gradients(warped)
    b = e0 - ix * u0 - iy * v0
    denom = alpha + ix * ix + iy * iy
    u = u0.copy()
    v = v0.copy()
    for _ in range(iters):
        ubar = _neighbor_mean(u)
        vbar = _neighbor_mean(v)
        shared = (ix * ubar + iy * vbar + b) / denom
        u = ubar - ix * shared
        v = vbar - iy * shared
    return np.stack([u, v], axis=2).astype(np.float32)


def warp_gray(img, flow):
    """Sample img at x + flow(x), bilinear with edge clamp (float32)."""
    h, w = img.shape
    ys, xs = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    return _bilinear(img, xs + flow[:, :, 0], ys + flow[:, :, 1]).astype(np.float32)


def _bilinear(img, x, y):
    h, w = img.shape
    x = np.clip(x, 0.0, w - 1.0)
    y = np.clip(y, 0.0, h - 1.0)
    x0 = np.floor(x).astype(np.intp)
    y0 = np.floor(y).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    im = img.astype(np.float64)
    top = im[y0, x0] * (1 - fx) + im[y0, x1] * fx
    bot = im[y1, x0] * (1 - fx) + im[y1, x1] * fx
    return top * (1 - fy) + bot * fy


def _central_gradients(img):
    gx = np.zeros_like(img)
    gy = np.zeros_like(img)
    gx[:, 1:-1] = (img[:, 2:] - img[:, :-2]) * 0.5
    gx[:, 0] = img[:, 1] - img[:, 0]
    gx[:, -1] = img[:, -1] - img[:, -2]
    gy[1:-1, :] = (img[2:, :] - img[:-2, :]) * 0.5
    gy[0, :] = img[1, :] - img[0, :]
    gy[-1, :] = img[-1, :] - img[-2, :]
    return gx, gy


def _neighbor_mean(a):
    up = np.vstack([a[:1, :], a[:-1, :]])
    dn = np.vstack([a[1:, :], a[-1:, :]])
    lf = np.hstack([a[:, :1], a[:, :-1]])
    rt = np.hstack([a[:, 1:], a[:, -1:]])
    return 0.25 * (up + dn + lf + rt)


def level_gradients(img):
    """Reference-image gradients used by the patch search."""
    return _central_gradients(img.astype(np.float64))
