"""Random color pattern generation for the tactile skin sticker.

Patches are assigned in raster order.  Each patch color is chosen from a
pool of uniformly sampled RGB candidates as the one whose minimum
Euclidean RGB distance to the already-assigned neighbors (of the 8
surrounding patches, only those above/left exist at decision time) is
largest.  Ties resolve to the earliest candidate, so a replay of the same
RNG stream reproduces the pattern exactly.
"""

from __future__ import annotations

import numpy as np


def generate_pattern(patches_x: int, patches_y: int, patch_px: int,
                     candidates_k: int, seed: int) -> np.ndarray:
    """Generate the pattern as a uint8 RGB image of size
    (patches_y*patch_px, patches_x*patch_px, 3)."""
    if patches_x <= 0 or patches_y <= 0 or patch_px <= 0:
        raise ValueError("patch counts and size must be positive")
    if candidates_k < 1:
        raise ValueError("candidates_k must be >= 1")
    colors = pattern_colors(patches_x, patches_y, candidates_k, seed)
    img = np.repeat(np.repeat(colors, patch_px, axis=0), patch_px, axis=1)
    return np.ascontiguousarray(img)


def pattern_colors(patches_x: int, patches_y: int, candidates_k: int,
                   seed: int) -> np.ndarray:
    """Per-patch colors, uint8 array of shape (patches_y, patches_x, 3)."""
    rng = np.random.default_rng(seed)
    colors = np.zeros((patches_y, patches_x, 3), dtype=np.uint8)
    for r in range(patches_y):
        for c in range(patches_x):
            cands = rng.integers(0, 256, size=(candidates_k, 3))
            nbrs = assigned_neighbors(colors, r, c)
            if nbrs.size == 0:
                colors[r, c] = cands[0]
                continue
            d = cands[:, None, :].astype(np.float64) - nbrs[None, :, :]
            mindist = np.sqrt((d * d).sum(axis=2)).min(axis=1)
            colors[r, c] = cands[int(np.argmax(mindist))]
    return colors


def assigned_neighbors(colors: np.ndarray, r: int, c: int) -> np.ndarray:
    """Colors of the 8-neighborhood patches already assigned in raster
    order (row above: three, same row: the left one)."""
    h, w = colors.shape[:2]
    nbrs = []
    for dr, dc in ((-1, -1), (-1, 0), (-1, 1), (0, -1)):
        rr, cc = r + dr, c + dc
        if 0 <= rr < h and 0 <= cc < w:
            nbrs.append(colors[rr, cc])
    if not nbrs:
        return np.empty((0, 3), dtype=np.float64)
    return np.array(nbrs, dtype=np.float64)
