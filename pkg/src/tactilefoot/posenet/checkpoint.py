"""Model checkpoint file: b"TFPM" magic, uint32 little-endian header
length, a UTF-8 JSON header (network spec, normalization, training
metadata, parameter count), then the raw float32 little-endian
parameter block."""

from __future__ import annotations

import json
import struct

import numpy as np

from .model import NetworkSpec, Normalization, PoseEstimator, PoseModel

MAGIC = b"TFPM"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, est: PoseEstimator, training_meta=None):
    params = np.ascontiguousarray(est.model.params, dtype="<f4")
    header = {
        "format_version": FORMAT_VERSION,
        "spec": est.model.spec.to_dict(),
        "normalization": est.norm.to_dict(),
        "training_meta": training_meta or {},
        "param_count": int(params.size),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        f.write(params.tobytes())


def load_checkpoint(path):
    """Returns (estimator, training_meta)."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != MAGIC:
        raise CheckpointError(f"{path}: bad magic {data[:4]!r}")
    if len(data) < 8:
        raise CheckpointError(f"{path}: truncated header")
    (hlen,) = struct.unpack("<I", data[4:8])
    if len(data) < 8 + hlen:
        raise CheckpointError(f"{path}: truncated header block")
    try:
        header = json.loads(data[8:8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: unreadable header: {exc}") from exc
    if header.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: unsupported format version {header.get('format_version')}")
    spec = NetworkSpec.from_dict(header["spec"])
    count = int(header["param_count"])
    if count != spec.param_count():
        raise CheckpointError(
            f"{path}: header says {count} params, spec needs {spec.param_count()}")
    body = data[8 + hlen:]
    if len(body) != 4 * count:
        raise CheckpointError(
            f"{path}: parameter block is {len(body)} bytes, expected {4 * count}")
    model = PoseModel(spec)
    model.params[:] = np.frombuffer(body, dtype="<f4")
    norm = Normalization.from_dict(header["normalization"])
    return PoseEstimator(model, norm), header.get("training_meta", {})
