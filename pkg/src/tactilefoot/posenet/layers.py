"""Network layers as pure functions: forward returns (y, cache), backward
takes (dy, cache) and returns input/parameter gradients.

Arrays are channels-last, (N, H, W, C) for feature maps.  Everything
runs in the dtype of the inputs, so the same code serves float32
training and float64 gradient checking.
"""

from __future__ import annotations

import numpy as np


def conv3_forward(x, w, b, relu=True):
    """3x3 convolution, stride 1, valid padding, optional fused ReLU.

    x: (N, H, W, Cin); w: (3, 3, Cin, Cout); b: (Cout,).
    """
    n, h, wd, cin = x.shape
    cols = np.lib.stride_tricks.sliding_window_view(x, (3, 3), axis=(1, 2))
    # (N, H-2, W-2, Cin, 3, 3) -> (N, H-2, W-2, 3*3*Cin)
    cols = np.ascontiguousarray(cols.transpose(0, 1, 2, 4, 5, 3))
    cols2 = cols.reshape(n, h - 2, wd - 2, 9 * cin)
    wmat = w.reshape(9 * cin, -1)
    z = cols2 @ wmat + b
    y = np.maximum(z, 0) if relu else z
    return y, (cols2, wmat, x.shape, z if relu else None, relu)


def conv3_backward(dy, cache):
    cols2, wmat, xshape, z, relu = cache
    if relu:
        dy = dy * (z > 0)
    n, h, wd, cin = xshape
    dwmat = np.tensordot(cols2, dy, axes=([0, 1, 2], [0, 1, 2]))
    db = dy.sum(axis=(0, 1, 2))
    dcols = dy @ wmat.T  # (N, H-2, W-2, 9*Cin)
    dcols = dcols.reshape(n, h - 2, wd - 2, 3, 3, cin)
    dx = np.zeros(xshape, dtype=dy.dtype)
    for ky in range(3):
        for kx in range(3):
            dx[:, ky:ky + h - 2, kx:kx + wd - 2, :] += dcols[:, :, :, ky, kx, :]
    dw = dwmat.reshape(3, 3, cin, -1)
    return dx, dw, db


def maxpool2_forward(x):
    """2x2 max pooling, stride 2; odd trailing row/col is dropped."""
    n, h, w, c = x.shape
    ho, wo = h // 2, w // 2
    xc = x[:, :ho * 2, :wo * 2, :]
    win = xc.reshape(n, ho, 2, wo, 2, c).transpose(0, 1, 3, 5, 2, 4)
    win = win.reshape(n, ho, wo, c, 4)
    idx = np.argmax(win, axis=-1)
    y = np.take_along_axis(win, idx[..., None], axis=-1)[..., 0]
    return y, (idx, x.shape)


def maxpool2_backward(dy, cache):
    idx, xshape = cache
    n, h, w, c = xshape
    ho, wo = h // 2, w // 2
    dwin = np.zeros((n, ho, wo, c, 4), dtype=dy.dtype)
    np.put_along_axis(dwin, idx[..., None], dy[..., None], axis=-1)
    dx = np.zeros(xshape, dtype=dy.dtype)
    dx[:, :ho * 2, :wo * 2, :] = (
        dwin.reshape(n, ho, wo, c, 2, 2)
        .transpose(0, 1, 4, 2, 5, 3)
        .reshape(n, ho * 2, wo * 2, c))
    return dx


def dense_forward(x, w, b, relu=False):
    """x: (N, D); w: (D, K); b: (K,)."""
    z = x @ w + b
    y = np.maximum(z, 0) if relu else z
    return y, (x, w, z if relu else None, relu)


def dense_backward(dy, cache):
    x, w, z, relu = cache
    if relu:
        dy = dy * (z > 0)
    dw = x.T @ dy
    db = dy.sum(axis=0)
    dx = dy @ w.T
    return dx, dw, db


def dropout_forward(x, rate, rng, train):
    """Inverted dropout; at eval time the input passes through untouched."""
    if not train or rate <= 0.0:
        return x, None
    keep = (rng.random(x.shape) >= rate).astype(x.dtype) / (1.0 - rate)
    return x * keep, keep


def dropout_backward(dy, mask):
    if mask is None:
        return dy
    return dy * mask
