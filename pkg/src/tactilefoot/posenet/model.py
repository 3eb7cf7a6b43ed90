"""Pose regression network: repeated conv3x3+ReLU / maxpool stages, then
a ReLU hidden layer with dropout and a linear two-output head.

Parameters live in one flat vector so the optimizer and the gradient
check can treat the whole network as a single function R^P -> R.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import layers as L


@dataclass(frozen=True)
class NetworkSpec:
    """Input height/width default to the full sensing raster; CI and the
    closed-loop controller use the smaller 32x28 variant."""

    in_h: int = 214
    in_w: int = 182
    in_ch: int = 2
    conv_channels: tuple = (64, 64, 32)
    dense_hidden: int = 128
    out_dim: int = 2
    dropout: float = 0.3

    def __post_init__(self):
        if self.in_h < 1 or self.in_w < 1 or self.in_ch < 1:
            raise ValueError("input dims must be positive")
        if not self.conv_channels:
            raise ValueError("need at least one conv stage")
        if not (0.0 <= self.dropout < 1.0):
            raise ValueError("dropout must be in [0, 1)")
        self.stage_dims()  # raises if any stage collapses

    def stage_dims(self):
        """(h, w, c) after each conv+pool stage; validates feasibility."""
        h, w, c = self.in_h, self.in_w, self.in_ch
        dims = []
        for cc in self.conv_channels:
            h, w = h - 2, w - 2
            if h < 1 or w < 1:
                raise ValueError(f"feature map collapsed to {h}x{w}")
            h, w = h // 2, w // 2
            if h < 1 or w < 1:
                raise ValueError("feature map collapsed after pooling")
            c = cc
            dims.append((h, w, c))
        return dims

    def flat_features(self):
        h, w, c = self.stage_dims()[-1]
        return h * w * c

    def param_layout(self):
        """Ordered (name, shape) covering the whole parameter vector."""
        out = []
        cin = self.in_ch
        for i, cc in enumerate(self.conv_channels):
            out.append((f"conv{i}.w", (3, 3, cin, cc)))
            out.append((f"conv{i}.b", (cc,)))
            cin = cc
        d = self.flat_features()
        out.append(("hidden.w", (d, self.dense_hidden)))
        out.append(("hidden.b", (self.dense_hidden,)))
        out.append(("head.w", (self.dense_hidden, self.out_dim)))
        out.append(("head.b", (self.out_dim,)))
        return out

    def param_count(self):
        return sum(int(np.prod(s)) for _, s in self.param_layout())

    def to_dict(self):
        return {
            "in_h": self.in_h, "in_w": self.in_w, "in_ch": self.in_ch,
            "conv_channels": list(self.conv_channels),
            "dense_hidden": self.dense_hidden, "out_dim": self.out_dim,
            "dropout": self.dropout,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["conv_channels"] = tuple(d["conv_channels"])
        return cls(**d)


def rmse_loss(y, t):
    """Root-mean-square error over every output element, with gradient.

    Gradient of sqrt(mean(d^2)) is d / (n * loss); at exactly zero loss
    the (sub)gradient is taken as zero.
    """
    d = y - t
    loss = float(np.sqrt(np.mean(d * d)))
    if loss == 0.0:
        return 0.0, np.zeros_like(y)
    return loss, d / (d.size * loss)


class PoseModel:
    """The network plus its flat parameter vector."""

    def __init__(self, spec: NetworkSpec, dtype=np.float32):
        self.spec = spec
        self.dtype = np.dtype(dtype)
        self.params = np.zeros(spec.param_count(), dtype=self.dtype)
        self._slices = {}
        off = 0
        for name, shape in spec.param_layout():
            size = int(np.prod(shape))
            self._slices[name] = (off, off + size, shape)
            off += size

    def view(self, name):
        a, b, shape = self._slices[name]
        return self.params[a:b].reshape(shape)

    def init_params(self, seed):
        """He-normal weights on ReLU layers, uniform Glorot on the head,
        zero biases."""
        rng = np.random.default_rng(seed)
        cin = self.spec.in_ch
        for i, cc in enumerate(self.spec.conv_channels):
            fan_in = 9 * cin
            w = rng.normal(0.0, math.sqrt(2.0 / fan_in), size=(3, 3, cin, cc))
            self.view(f"conv{i}.w")[:] = w
            self.view(f"conv{i}.b")[:] = 0.0
            cin = cc
        d = self.spec.flat_features()
        self.view("hidden.w")[:] = rng.normal(
            0.0, math.sqrt(2.0 / d), size=(d, self.spec.dense_hidden))
        self.view("hidden.b")[:] = 0.0
        lim = math.sqrt(6.0 / (self.spec.dense_hidden + self.spec.out_dim))
        self.view("head.w")[:] = rng.uniform(
            -lim, lim, size=(self.spec.dense_hidden, self.spec.out_dim))
        self.view("head.b")[:] = 0.0
        return self

    def with_dtype(self, dtype):
        m = PoseModel(self.spec, dtype=dtype)
        m.params[:] = self.params.astype(dtype)
        return m

    def forward(self, x, train=False, dropout_rng=None):
        y, _ = self._forward(np.asarray(x, dtype=self.dtype), train, dropout_rng)
        return y

    def _forward(self, x, train, dropout_rng):
        if x.ndim != 4 or x.shape[1:] != (self.spec.in_h, self.spec.in_w,
                                          self.spec.in_ch):
            raise ValueError(
                f"expected (N, {self.spec.in_h}, {self.spec.in_w}, "
                f"{self.spec.in_ch}) input, got {x.shape}")
        caches = []
        h = x
        for i in range(len(self.spec.conv_channels)):
            h, c = L.conv3_forward(h, self.view(f"conv{i}.w"),
                                   self.view(f"conv{i}.b"), relu=True)
            caches.append(("conv", i, c))
            h, c = L.maxpool2_forward(h)
            caches.append(("pool", i, c))
        flat_shape = h.shape
        h = h.reshape(h.shape[0], -1)
        caches.append(("flatten", None, flat_shape))
        h, c = L.dense_forward(h, self.view("hidden.w"), self.view("hidden.b"),
                               relu=True)
        caches.append(("dense", "hidden", c))
        if train and self.spec.dropout > 0.0 and dropout_rng is None:
            raise ValueError("training forward needs a dropout rng")
        h, mask = L.dropout_forward(h, self.spec.dropout, dropout_rng, train)
        caches.append(("dropout", None, mask))
        y, c = L.dense_forward(h, self.view("head.w"), self.view("head.b"),
                               relu=False)
        caches.append(("dense", "head", c))
        return y, caches

    def _backward(self, dy, caches):
        """Flat parameter gradient from the output gradient dy."""
        grad = np.zeros_like(self.params)

        def put(name, g):
            a, b, _ = self._slices[name]
            grad[a:b] = g.reshape(-1)

        for kind, tag, cache in reversed(caches):
            if kind == "dense":
                dy, dw, db = L.dense_backward(dy, cache)
                put(f"{tag}.w", dw)
                put(f"{tag}.b", db)
            elif kind == "dropout":
                dy = L.dropout_backward(dy, cache)
            elif kind == "flatten":
                dy = dy.reshape(cache)
            elif kind == "pool":
                dy = L.maxpool2_backward(dy, cache)
            else:
                dy, dw, db = L.conv3_backward(dy, cache)
                put(f"conv{tag}.w", dw)
                put(f"conv{tag}.b", db)
        return grad

    def loss_and_grad(self, x, t, dropout_rng=None, train=True):
        """RMSE loss and its gradient as one flat vector over params."""
        x = np.asarray(x, dtype=self.dtype)
        t = np.asarray(t, dtype=self.dtype)
        y, caches = self._forward(x, train, dropout_rng)
        loss, dy = rmse_loss(y, t)
        return loss, self._backward(dy, caches)


@dataclass
class Normalization:
    """Raw flow field / degree targets <-> network units."""

    input_scale: float
    t_mean: np.ndarray
    t_scale: np.ndarray

    def to_dict(self):
        return {"input_scale": self.input_scale,
                "t_mean": [float(v) for v in self.t_mean],
                "t_scale": [float(v) for v in self.t_scale]}

    @classmethod
    def from_dict(cls, d):
        return cls(input_scale=float(d["input_scale"]),
                   t_mean=np.asarray(d["t_mean"], dtype=np.float64),
                   t_scale=np.asarray(d["t_scale"], dtype=np.float64))

    @classmethod
    def fit(cls, targets_deg, input_scale):
        t = np.asarray(targets_deg, dtype=np.float64)
        mean = t.mean(axis=0)
        scale = t.std(axis=0)
        scale = np.where(scale < 1e-9, 1.0, scale)
        return cls(input_scale=float(input_scale), t_mean=mean, t_scale=scale)

    def encode_targets(self, deg):
        return (np.asarray(deg, dtype=np.float64) - self.t_mean) / self.t_scale

    def decode_targets(self, units):
        return np.asarray(units, dtype=np.float64) * self.t_scale + self.t_mean

    def encode_inputs(self, fields):
        return np.asarray(fields, dtype=np.float32) / self.input_scale


class PoseEstimator:
    """Model plus the normalization that maps it to physical units."""

    def __init__(self, model: PoseModel, norm: Normalization):
        self.model = model
        self.norm = norm

    def predict_degrees(self, fields, batch_size=256):
        x = self.norm.encode_inputs(fields)
        outs = []
        for i in range(0, len(x), batch_size):
            outs.append(self.model.forward(x[i:i + batch_size]))
        y = np.concatenate(outs, axis=0) if outs else np.zeros((0, 2))
        return self.norm.decode_targets(y)
