"""Flow-field to pose regression: a small convolutional network written
directly on numpy, trained with Adam on an RMSE objective."""

from .model import (NetworkSpec, Normalization, PoseEstimator, PoseModel,
                    rmse_loss)
from .train import Adam, TrainConfig, evaluate, read_curve, train, write_curve
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint

__all__ = [
    "NetworkSpec", "Normalization", "PoseEstimator", "PoseModel", "rmse_loss",
    "Adam", "TrainConfig", "evaluate", "train", "read_curve", "write_curve",
    "CheckpointError", "load_checkpoint", "save_checkpoint",
]
