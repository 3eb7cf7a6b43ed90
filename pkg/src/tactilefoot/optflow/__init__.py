"""Marker-pattern flow sensing: pattern generation and dense flow."""

from .pattern import generate_pattern, pattern_colors
from .dis import FlowParams, dis_flow, downsample_field, grayscale
from .backend import ACTIVE, get_backend

__all__ = [
    "generate_pattern",
    "pattern_colors",
    "FlowParams",
    "dis_flow",
    "downsample_field",
    "grayscale",
    "ACTIVE",
    "get_backend",
]
