"""Training and evaluation for the pose network.

Target vectors are ordered (theta_f, theta_g) everywhere.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .model import Normalization, PoseEstimator, PoseModel, rmse_loss


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-4
    batch: int = 16
    epochs: int = 100
    split: float = 0.8
    seed: int = 0
    input_scale: float = 8.0
    standardize_targets: bool = True

    def __post_init__(self):
        if not (0.0 < self.split < 1.0):
            raise ValueError("split must be in (0, 1)")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


class Adam:
    """Vanilla Adam on one flat parameter vector."""

    def __init__(self, n, lr=1e-4, beta1=0.9, beta2=0.999, eps=1e-8,
                 dtype=np.float32):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = np.zeros(n, dtype=dtype)
        self.v = np.zeros(n, dtype=dtype)

    def step(self, params, grad):
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        mhat = self.m / (1.0 - self.beta1 ** self.t)
        vhat = self.v / (1.0 - self.beta2 ** self.t)
        params -= (self.lr * mhat / (np.sqrt(vhat) + self.eps)).astype(params.dtype)


def evaluate(est: PoseEstimator, fields, targets_deg, batch_size=256):
    """Per-angle and combined RMSE in degrees, plus per-sample residuals."""
    if len(fields) == 0:
        raise ValueError("empty evaluation set")
    pred = est.predict_degrees(fields, batch_size=batch_size)
    t = np.asarray(targets_deg, dtype=np.float64)
    err = pred - t
    per = np.sqrt((err * err).mean(axis=0))
    return {
        "rmse_theta_f": float(per[0]),
        "rmse_theta_g": float(per[1]),
        "rmse": float(np.sqrt((err * err).mean())),
        "residuals": err,
    }


def train(fields, targets_deg, spec, cfg: TrainConfig, val_fields=None,
          val_targets_deg=None, curve_path=None, log=None):
    """Train a fresh estimator; returns (estimator, history).

    Normalization is fitted on the training targets only.  history rows
    carry degree-space RMSE: the train column is accumulated from the
    minibatch passes (dropout active), the val column is a clean eval.
    """
    fields = np.asarray(fields, dtype=np.float32)
    targets_deg = np.asarray(targets_deg, dtype=np.float64)
    n = len(fields)
    if n == 0:
        raise ValueError("no training samples")

    if cfg.standardize_targets:
        norm = Normalization.fit(targets_deg, cfg.input_scale)
    else:
        norm = Normalization(cfg.input_scale, np.zeros(2), np.ones(2))
    ss = np.random.SeedSequence(cfg.seed)
    init_ss, shuffle_ss, drop_ss = ss.spawn(3)
    model = PoseModel(spec).init_params(init_ss.generate_state(1)[0])
    est = PoseEstimator(model, norm)

    x = norm.encode_inputs(fields)
    t = norm.encode_targets(targets_deg).astype(np.float32)
    shuffle_rng = np.random.default_rng(shuffle_ss)
    drop_rng = np.random.default_rng(drop_ss)
    opt = Adam(model.params.size, lr=cfg.lr)

    history = []
    for epoch in range(1, cfg.epochs + 1):
        perm = shuffle_rng.permutation(n)
        sq_deg = 0.0
        m_deg = 0
        for i in range(0, n, cfg.batch):
            sel = perm[i:i + cfg.batch]
            xb, tb = x[sel], t[sel]
            yb, caches = model._forward(xb, True, drop_rng)
            loss, dy = rmse_loss(yb, tb)
            grad = model._backward(dy, caches)
            opt.step(model.params, grad)
            err = norm.decode_targets(yb) - targets_deg[sel]
            sq_deg += float((err * err).sum())
            m_deg += err.size
        row = {"epoch": epoch, "train_rmse": float(np.sqrt(sq_deg / m_deg))}
        if val_fields is not None and len(val_fields):
            row["val_rmse"] = evaluate(est, val_fields, val_targets_deg)["rmse"]
        else:
            row["val_rmse"] = float("nan")
        history.append(row)
        if log:
            log(f"epoch {epoch}/{cfg.epochs}  train_rmse {row['train_rmse']:.4f}  "
                f"val_rmse {row['val_rmse']:.4f}")
    if curve_path:
        write_curve(curve_path, history)
    return est, history


def write_curve(path, history):
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["epoch", "train_rmse", "val_rmse"])
        for row in history:
            wr.writerow([row["epoch"], f"{row['train_rmse']:.6f}",
                         f"{row['val_rmse']:.6f}"])


def read_curve(path):
    with open(path, newline="") as f:
        rd = csv.DictReader(f)
        return [{"epoch": int(r["epoch"]),
                 "train_rmse": float(r["train_rmse"]),
                 "val_rmse": float(r["val_rmse"])} for r in rd]
