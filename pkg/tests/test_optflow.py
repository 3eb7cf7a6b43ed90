import math

import numpy as np
import pytest

from tactilefoot import optflow
from tactilefoot.optflow import dis as D
from tactilefoot.optflow import pattern as P


def naive_pattern_colors(px, py, k, seed):
    # independent re-statement of the assignment rule, plain loops
    rng = np.random.default_rng(seed)
    colors = [[None] * px for _ in range(py)]
    for r in range(py):
        for c in range(px):
            cands = rng.integers(0, 256, size=(k, 3))
            nbrs = []
            for dr, dc in ((-1, -1), (-1, 0), (-1, 1), (0, -1)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < py and 0 <= cc < px and colors[rr][cc] is not None:
                    nbrs.append(colors[rr][cc])
            if not nbrs:
                colors[r][c] = tuple(int(x) for x in cands[0])
                continue
            best, best_d = None, -1.0
            for cand in cands:
                dmin = min(
                    math.dist([float(x) for x in cand], [float(x) for x in nb])
                    for nb in nbrs)
                if dmin > best_d:
                    best, best_d = tuple(int(x) for x in cand), dmin
            colors[r][c] = best
    return np.array(colors, dtype=np.uint8)


def test_pattern_colors_match_naive_rule():
    for seed in (0, 1, 2):
        got = P.pattern_colors(6, 5, 8, seed)
        want = naive_pattern_colors(6, 5, 8, seed)
        assert np.array_equal(got, want)


def test_pattern_image_layout():
    img = optflow.generate_pattern(4, 3, 5, 8, seed=9)
    assert img.shape == (15, 20, 3) and img.dtype == np.uint8
    colors = P.pattern_colors(4, 3, 8, 9)
    # every 5x5 cell is one flat color
    for r in range(3):
        for c in range(4):
            cell = img[r * 5:(r + 1) * 5, c * 5:(c + 1) * 5]
            assert (cell == colors[r, c]).all()


def test_pattern_validation():
    with pytest.raises(ValueError):
        optflow.generate_pattern(0, 3, 5, 8, seed=0)
    with pytest.raises(ValueError):
        optflow.generate_pattern(4, 3, 5, 0, seed=0)


def test_flow_params_validation():
    with pytest.raises(ValueError):
        D.FlowParams(pyramid_levels=0)
    with pytest.raises(ValueError):
        D.FlowParams(patch_stride=9, patch_size=8)
    with pytest.raises(ValueError):
        D.FlowParams(patch_stride=0)
    with pytest.raises(ValueError):
        D.FlowParams(iterations_per_patch=0)
    with pytest.raises(ValueError):
        D.FlowParams(smooth_weight=0.0)


def test_grayscale_weights():
    img = np.zeros((2, 3, 3), dtype=np.uint8)
    img[0, 0] = (255, 0, 0)
    img[0, 1] = (0, 255, 0)
    img[0, 2] = (0, 0, 255)
    g = D.grayscale(img)
    assert g.dtype == np.float32
    assert g[0, 0] == pytest.approx(0.299, abs=1e-6)
    assert g[0, 1] == pytest.approx(0.587, abs=1e-6)
    assert g[0, 2] == pytest.approx(0.114, abs=1e-6)
    assert g[1, 0] == 0.0


def test_pyramid_shapes_and_floor():
    img = np.zeros((100, 130), dtype=np.float32)
    pyr = D.build_pyramid(img, 5, 8)
    assert [p.shape for p in pyr] == [(100, 130), (50, 65), (25, 32), (12, 16)]
    # next level would be 6x8 < min_size 8 in one dim


def test_patch_grid_edge_aligned():
    xs, ys = D.patch_grid(17, 23, 8, 4)
    assert xs.max() == 23 - 8 and ys.max() == 17 - 8
    assert 0 in xs and 0 in ys
    xu = np.unique(xs)
    assert list(xu) == [0, 4, 8, 12, 15]
    yu = np.unique(ys)
    assert list(yu) == [0, 4, 8, 9]


def test_downsample_field_matches_block_means():
    rng = np.random.default_rng(3)
    f = rng.normal(size=(10, 14, 2)).astype(np.float32)
    got = D.downsample_field(f, 3, 4)
    yb = [(i * 10) // 3 for i in range(4)]
    xb = [(i * 14) // 4 for i in range(5)]
    for i in range(3):
        for j in range(4):
            blk = f[yb[i]:yb[i + 1], xb[j]:xb[j + 1], :]
            assert np.allclose(got[i, j], blk.mean(axis=(0, 1)), atol=1e-6)
    with pytest.raises(ValueError):
        D.downsample_field(f, 11, 4)


def shifted(ref, d):
    qry = np.full_like(ref, 127)
    ys = slice(max(0, d[1]), ref.shape[0] + min(0, d[1]))
    xs = slice(max(0, d[0]), ref.shape[1] + min(0, d[0]))
    ys_s = slice(max(0, -d[1]), ref.shape[0] + min(0, -d[1]))
    xs_s = slice(max(0, -d[0]), ref.shape[1] + min(0, -d[0]))
    qry[ys, xs] = ref[ys_s, xs_s]
    return qry


def test_flow_recovers_integer_shift():
    pat = optflow.generate_pattern(40, 30, 8, 8, seed=1)  # 320x240
    for d in [(2, 1), (-3, 2), (0, -4)]:
        flow = optflow.dis_flow(pat, shifted(pat, d))
        b = 12
        err = np.hypot(flow[b:-b, b:-b, 0] - d[0], flow[b:-b, b:-b, 1] - d[1])
        assert err.mean() < 0.25, (d, err.mean())


def test_flow_recovers_smooth_warp():
    from tactilefoot.skinsim import render_frame
    pat = optflow.generate_pattern(40, 30, 8, 8, seed=2)
    h, w = pat.shape[:2]
    ys, xs = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    F = np.zeros((h, w, 2), np.float32)
    F[:, :, 0] = 1.5 * np.sin(2 * np.pi * xs / 300.0)
    F[:, :, 1] = -1.0 * np.cos(2 * np.pi * ys / 250.0)
    flow = optflow.dis_flow(pat, render_frame(pat, F))
    b = 12
    err = np.hypot(*(flow - F)[b:-b, b:-b].transpose(2, 0, 1))
    assert err.mean() < 0.5, err.mean()


def test_flow_rejects_mismatched_shapes():
    a = np.zeros((32, 32, 3), dtype=np.uint8)
    b = np.zeros((32, 40, 3), dtype=np.uint8)
    with pytest.raises(ValueError):
        optflow.dis_flow(a, b)


def test_backends_agree():
    mod, name = optflow.get_backend("cython")
    if name != "cython":  # pragma: no cover
        pytest.skip("extension not built")
    pat = optflow.generate_pattern(40, 30, 8, 8, seed=4)
    qry = shifted(pat, (3, -2))
    f_cy = optflow.dis_flow(pat, qry, backend="cython")
    f_np = optflow.dis_flow(pat, qry, backend="numpy")
    d = np.abs(f_cy - f_np)
    assert d.mean() < 0.01 and d.max() < 0.1


def test_flow_deterministic():
    pat = optflow.generate_pattern(30, 24, 8, 8, seed=5)
    qry = shifted(pat, (1, 2))
    a = optflow.dis_flow(pat, qry)
    b = optflow.dis_flow(pat, qry)
    assert np.array_equal(a, b)
