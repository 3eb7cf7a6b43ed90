# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled flow kernels.  Mirrors _dis_np function for function; keep
the numerics in lockstep (float32 images, float64 accumulators) so the
backends agree to rounding error."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, floor, isfinite

cnp.import_array()


cdef inline double _bilin(const float[:, ::1] img, double x, double y,
                          Py_ssize_t h, Py_ssize_t w) noexcept nogil:
    cdef double fx, fy, top, bot
    cdef Py_ssize_t x0, y0, x1, y1
    if x < 0.0:
        x = 0.0
    elif x > w - 1.0:
        x = w - 1.0
    if y < 0.0:
        y = 0.0
    elif y > h - 1.0:
        y = h - 1.0
    x0 = <Py_ssize_t>floor(x)
    y0 = <Py_ssize_t>floor(y)
    x1 = x0 + 1
    if x1 > w - 1:
        x1 = w - 1
    y1 = y0 + 1
    if y1 > h - 1:
        y1 = h - 1
    fx = x - x0
    fy = y - y0
    top = (<double>img[y0, x0]) * (1.0 - fx) + (<double>img[y0, x1]) * fx
    bot = (<double>img[y1, x0]) * (1.0 - fx) + (<double>img[y1, x1]) * fx
    return top * (1.0 - fy) + bot * fy


def patch_inverse_search(ref, qry, gx, gy, x0s, y0s, uv, patch, iters):
    """Same contract as the numpy version (see _dis_np)."""
    cdef const float[:, ::1] refv = np.ascontiguousarray(ref, dtype=np.float32)
    cdef const float[:, ::1] qryv = np.ascontiguousarray(qry, dtype=np.float32)
    cdef const double[:, ::1] gxv = np.ascontiguousarray(gx, dtype=np.float64)
    cdef const double[:, ::1] gyv = np.ascontiguousarray(gy, dtype=np.float64)
    cdef const cnp.int64_t[::1] xv = np.ascontiguousarray(x0s, dtype=np.int64)
    cdef const cnp.int64_t[::1] yv = np.ascontiguousarray(y0s, dtype=np.int64)
    cdef const float[:, ::1] uvv = np.ascontiguousarray(uv, dtype=np.float32)
    cdef Py_ssize_t h = refv.shape[0], w = refv.shape[1]
    cdef Py_ssize_t n = xv.shape[0]
    cdef int ps = patch
    cdef int nit = iters
    cdef Py_ssize_t npx = ps * ps

    out_np = np.empty((n, 2), dtype=np.float32)
    res_np = np.empty(n, dtype=np.float64)
    cdef float[:, ::1] outv = out_np
    cdef double[::1] resv = res_np

    t_np = np.empty(npx, dtype=np.float64)
    gxt_np = np.empty(npx, dtype=np.float64)
    gyt_np = np.empty(npx, dtype=np.float64)
    cdef double[::1] t = t_np
    cdef double[::1] gxt = gxt_np
    cdef double[::1] gyt = gyt_np

    cdef Py_ssize_t p, i, j, k, it
    cdef Py_ssize_t x0, y0
    cdef double sxx, sxy, syy, det, ih00, ih01, ih11
    cdef double u, v, u0, v0, qs, e, bx, by, du, dv
    cdef double res0, res, acc
    cdef bint lost

    with nogil:
        for p in range(n):
            x0 = xv[p]
            y0 = yv[p]
            k = 0
            sxx = 0.0
            sxy = 0.0
            syy = 0.0
            for i in range(ps):
                for j in range(ps):
                    t[k] = <double>refv[y0 + i, x0 + j]
                    gxt[k] = gxv[y0 + i, x0 + j]
                    gyt[k] = gyv[y0 + i, x0 + j]
                    sxx += gxt[k] * gxt[k]
                    sxy += gxt[k] * gyt[k]
                    syy += gyt[k] * gyt[k]
                    k += 1
            u0 = <double>uvv[p, 0]
            v0 = <double>uvv[p, 1]
            u = u0
            v = v0

            acc = 0.0
            k = 0
            for i in range(ps):
                for j in range(ps):
                    qs = _bilin(qryv, x0 + j + u0, y0 + i + v0, h, w)
                    acc += fabs(qs - t[k])
                    k += 1
            res0 = acc / npx

            det = sxx * syy - sxy * sxy
            if det >= 1e-10:
                ih00 = syy / det
                ih01 = -sxy / det
                ih11 = sxx / det
                for it in range(nit):
                    bx = 0.0
                    by = 0.0
                    k = 0
                    for i in range(ps):
                        for j in range(ps):
                            qs = _bilin(qryv, x0 + j + u, y0 + i + v, h, w)
                            e = qs - t[k]
                            bx += gxt[k] * e
                            by += gyt[k] * e
                            k += 1
                    du = ih00 * bx + ih01 * by
                    dv = ih01 * bx + ih11 * by
                    u -= du
                    v -= dv
                    lost = (fabs(u - u0) > ps or fabs(v - v0) > ps
                            or not isfinite(u) or not isfinite(v))
                    if lost:
                        u = u0
                        v = v0
                        break
            if not isfinite(u) or not isfinite(v):
                u = u0
                v = v0

            acc = 0.0
            k = 0
            for i in range(ps):
                for j in range(ps):
                    qs = _bilin(qryv, x0 + j + u, y0 + i + v, h, w)
                    acc += fabs(qs - t[k])
                    k += 1
            res = acc / npx
            if res > res0:
                u = u0
                v = v0
                res = res0
            outv[p, 0] = <float>u
            outv[p, 1] = <float>v
            resv[p] = res
    return out_np, res_np


def densify(uv, res, x0s, y0s, patch, h, w):
    """Dense flow by residual-weighted averaging of overlapping patches."""
    cdef const float[:, ::1] uvv = np.ascontiguousarray(uv, dtype=np.float32)
    cdef const double[::1] resv = np.ascontiguousarray(res, dtype=np.float64)
    cdef const cnp.int64_t[::1] xv = np.ascontiguousarray(x0s, dtype=np.int64)
    cdef const cnp.int64_t[::1] yv = np.ascontiguousarray(y0s, dtype=np.int64)
    cdef Py_ssize_t hh = h, ww = w
    cdef int ps = patch
    cdef Py_ssize_t n = xv.shape[0]

    num_np = np.zeros((hh, ww, 2), dtype=np.float64)
    den_np = np.zeros((hh, ww), dtype=np.float64)
    out_np = np.empty((hh, ww, 2), dtype=np.float32)
    cdef double[:, :, ::1] num = num_np
    cdef double[:, ::1] den = den_np
    cdef float[:, :, ::1] outv = out_np

    cdef Py_ssize_t p, i, j, x0, y0
    cdef double wt, d
    with nogil:
        for p in range(n):
            wt = 1.0 / (1e-3 + resv[p])
            x0 = xv[p]
            y0 = yv[p]
            for i in range(ps):
                for j in range(ps):
                    num[y0 + i, x0 + j, 0] += wt * (<double>uvv[p, 0])
                    num[y0 + i, x0 + j, 1] += wt * (<double>uvv[p, 1])
                    den[y0 + i, x0 + j] += wt
        for i in range(hh):
            for j in range(ww):
                d = den[i, j]
                if d <= 0.0:
                    d = 1.0
                outv[i, j, 0] = <float>(num[i, j, 0] / d)
                outv[i, j, 1] = <float>(num[i, j, 1] / d)
    return out_np


def warp_gray(img, flow):
    """Sample img at x + flow(x), bilinear with edge clamp (float32)."""
    cdef const float[:, ::1] imv = np.ascontiguousarray(img, dtype=np.float32)
    cdef const float[:, :, ::1] fv = np.ascontiguousarray(flow, dtype=np.float32)
    cdef Py_ssize_t h = imv.shape[0], w = imv.shape[1]
    out_np = np.empty((h, w), dtype=np.float32)
    cdef float[:, ::1] outv = out_np
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(h):
            for j in range(w):
                outv[i, j] = <float>_bilin(imv, j + (<double>fv[i, j, 0]),
                                           i + (<double>fv[i, j, 1]), h, w)
    return out_np


def variational_refine(flow, ref, qry, alpha, iters):
    """Same smoothing pass as the numpy version (see _dis_np)."""
    cdef const float[:, :, ::1] fv = np.ascontiguousarray(flow, dtype=np.float32)
    cdef const float[:, ::1] refv = np.ascontiguousarray(ref, dtype=np.float32)
    cdef Py_ssize_t h = refv.shape[0], w = refv.shape[1]
    cdef double al = alpha
    cdef int nit = iters

    warped_np = warp_gray(qry, flow)
    cdef const float[:, ::1] wv = warped_np

    ix_np = np.empty((h, w), dtype=np.float64)
    iy_np = np.empty((h, w), dtype=np.float64)
    b_np = np.empty((h, w), dtype=np.float64)
    u_np = np.empty((h, w), dtype=np.float64)
    v_np = np.empty((h, w), dtype=np.float64)
    un_np = np.empty((h, w), dtype=np.float64)
    vn_np = np.empty((h, w), dtype=np.float64)
    out_np = np.empty((h, w, 2), dtype=np.float32)
    cdef double[:, ::1] ix = ix_np, iy = iy_np, b = b_np
    cdef double[:, ::1] u = u_np, v = v_np, un = un_np, vn = vn_np
    cdef float[:, :, ::1] resv = out_np

    cdef Py_ssize_t i, j, it
    cdef Py_ssize_t im1, ip1, jm1, jp1
    cdef double gxv, gyv, e0, u0, v0, ubar, vbar, shared, denom
    with nogil:
        for i in range(h):
            for j in range(w):
                if j == 0:
                    gxv = (<double>wv[i, 1]) - (<double>wv[i, 0])
                elif j == w - 1:
                    gxv = (<double>wv[i, w - 1]) - (<double>wv[i, w - 2])
                else:
                    gxv = ((<double>wv[i, j + 1]) - (<double>wv[i, j - 1])) * 0.5
                if i == 0:
                    gyv = (<double>wv[1, j]) - (<double>wv[0, j])
                elif i == h - 1:
                    gyv = (<double>wv[h - 1, j]) - (<double>wv[h - 2, j])
                else:
                    gyv = ((<double>wv[i + 1, j]) - (<double>wv[i - 1, j])) * 0.5
                ix[i, j] = gxv
                iy[i, j] = gyv
                u0 = <double>fv[i, j, 0]
                v0 = <double>fv[i, j, 1]
                e0 = (<double>wv[i, j]) - (<double>refv[i, j])
                b[i, j] = e0 - gxv * u0 - gyv * v0
                u[i, j] = u0
                v[i, j] = v0
        for it in range(nit):
            for i in range(h):
                im1 = i - 1 if i > 0 else 0
                ip1 = i + 1 if i < h - 1 else h - 1
                for j in range(w):
                    jm1 = j - 1 if j > 0 else 0
                    jp1 = j + 1 if j < w - 1 else w - 1
                    ubar = 0.25 * (u[im1, j] + u[ip1, j] + u[i, jm1] + u[i, jp1])
                    vbar = 0.25 * (v[im1, j] + v[ip1, j] + v[i, jm1] + v[i, jp1])
                    denom = al + ix[i, j] * ix[i, j] + iy[i, j] * iy[i, j]
                    shared = (ix[i, j] * ubar + iy[i, j] * vbar + b[i, j]) / denom
                    un[i, j] = ubar - ix[i, j] * shared
                    vn[i, j] = vbar - iy[i, j] * shared
            for i in range(h):
                for j in range(w):
                    u[i, j] = un[i, j]
                    v[i, j] = vn[i, j]
        for i in range(h):
            for j in range(w):
                resv[i, j, 0] = <float>u[i, j]
                resv[i, j, 1] = <float>v[i, j]
    return out_np
