import numpy as np
import pytest

from tactilefoot import dataset as DS


def make_fake(n, h=4, w=3, seed=0):
    rng = np.random.default_rng(seed)
    return DS.Dataset(
        fields=rng.normal(size=(n, h, w, 2)).astype(np.float32),
        theta_g=rng.uniform(-12, 12, n).astype(np.float32),
        theta_leg=rng.uniform(40, 135, n).astype(np.float32),
        theta_f=rng.uniform(-13, 13, n).astype(np.float32),
        meta={"seed": seed},
    )


def test_grid_spans_both_sweeps():
    g = DS.GenConfig().grid()
    assert len(g) == 500
    tgs = sorted({tg for tg, _ in g})
    tls = sorted({tl for _, tl in g})
    assert len(tgs) == 25 and tgs[0] == -12.0 and tgs[-1] == 12.0
    assert len(tls) == 20 and tls[0] == 40.0 and tls[-1] == 135.0


def test_gen_config_validation():
    with pytest.raises(ValueError):
        DS.GenConfig(cam_w=150, cam_h=120)  # does not tile 80 patches
    with pytest.raises(ValueError):
        DS.GenConfig(theta_g_step=0.0)
    with pytest.raises(ValueError):
        DS.GenConfig(theta_leg_start=100.0, theta_leg_stop=50.0)


def test_generate_single_point_round_trip(tmp_path):
    cfg = DS.GenConfig(theta_g_start=5.0, theta_g_stop=5.0,
                       theta_leg_start=90.0, theta_leg_stop=90.0)
    ds = DS.generate_dataset(cfg, seed=77)
    assert len(ds) == 1
    assert ds.theta_g[0] == 5.0 and ds.theta_leg[0] == 90.0
    path = tmp_path / "one.tfds"
    DS.save_dataset(path, ds)
    back = DS.load_dataset(path)
    assert np.array_equal(back.fields, ds.fields)
    assert np.array_equal(back.theta_f, ds.theta_f)
    assert back.meta["seed"] == 77


def test_generate_deterministic_bytes(tmp_path):
    cfg = DS.GenConfig(theta_g_start=0.0, theta_g_stop=1.0,
                       theta_leg_start=90.0, theta_leg_stop=95.0,
                       theta_leg_step=5.0)
    a = tmp_path / "a.tfds"
    b = tmp_path / "b.tfds"
    DS.save_dataset(a, DS.generate_dataset(cfg, seed=5))
    DS.save_dataset(b, DS.generate_dataset(cfg, seed=5))
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.tfds"
    DS.save_dataset(c, DS.generate_dataset(cfg, seed=6))
    assert a.read_bytes() != c.read_bytes()


def test_targets_order_is_foot_then_ground():
    ds = make_fake(5)
    t = ds.targets()
    assert np.allclose(t[:, 0], ds.theta_f)
    assert np.allclose(t[:, 1], ds.theta_g)


def test_split_paper_counts():
    ds = make_fake(500)
    tr, te = DS.split(ds, 0.8, seed=1)
    assert len(tr) == 400 and len(te) == 100


def test_split_disjoint_exhaustive():
    ds = make_fake(37)
    tr, te = DS.split(ds, 0.7, seed=2)
    assert len(tr) + len(te) == 37
    seen = np.concatenate([tr.theta_f, te.theta_f])
    assert sorted(seen.tolist()) == sorted(ds.theta_f.tolist())


def test_split_single_sample_warns():
    ds = make_fake(1)
    with pytest.warns(UserWarning):
        tr, te = DS.split(ds, 0.8, seed=0)
    assert len(tr) == 1 and len(te) == 0


def test_split_deterministic_and_ratio_validated():
    ds = make_fake(50)
    a1, b1 = DS.split(ds, 0.8, seed=9)
    a2, b2 = DS.split(ds, 0.8, seed=9)
    assert np.array_equal(a1.fields, a2.fields)
    assert np.array_equal(b1.fields, b2.fields)
    with pytest.raises(ValueError):
        DS.split(ds, 1.0, seed=0)


def test_save_load_round_trip(tmp_path):
    ds = make_fake(7, seed=3)
    path = tmp_path / "d.tfds"
    DS.save_dataset(path, ds)
    back = DS.load_dataset(path)
    assert np.array_equal(back.fields, ds.fields)
    assert np.array_equal(back.theta_g, ds.theta_g)
    assert np.array_equal(back.theta_leg, ds.theta_leg)
    assert np.array_equal(back.theta_f, ds.theta_f)


def test_load_rejects_damage(tmp_path):
    ds = make_fake(3)
    path = tmp_path / "d.tfds"
    DS.save_dataset(path, ds)
    blob = path.read_bytes()
    bad = tmp_path / "bad.tfds"
    bad.write_bytes(b"NOPE" + blob[4:])
    with pytest.raises(DS.DatasetError):
        DS.load_dataset(bad)
    trunc = tmp_path / "trunc.tfds"
    trunc.write_bytes(blob[:-5])
    with pytest.raises(DS.DatasetError):
        DS.load_dataset(trunc)
