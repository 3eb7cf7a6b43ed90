import json
import math

import numpy as np
import pytest

import tactilefoot.grasp as GR


def test_friction_model_validation():
    m = GR.FrictionModel(mu_static_0=1.0, mu_slope=-0.05, mu_kinetic_ratio=0.8)
    assert m.mu_s(2.0) == pytest.approx(0.9, abs=1e-12)
    assert m.mu_k(2.0) == pytest.approx(0.72, abs=1e-12)
    for bad in (0.0, 1.0, 1.2, -0.1):
        with pytest.raises(GR.GraspError):
            GR.FrictionModel(mu_kinetic_ratio=bad)


def test_nominal_mu_examples():
    m = GR.FrictionModel(mu_static_0=0.8, mu_slope=0.01)
    assert GR.nominal_mu(m, (0.0, 10.0)) == pytest.approx(0.85, abs=1e-12)
    # collapsed range evaluates the model at the point
    assert GR.nominal_mu(m, (2.0, 2.0)) == pytest.approx(m.mu_s(2.0), abs=1e-12)
    with pytest.raises(GR.GraspError):
        GR.nominal_mu(m, (5.0, 1.0))
    steep = GR.FrictionModel(mu_static_0=0.8, mu_slope=-0.2)
    with pytest.raises(GR.GraspError):
        GR.nominal_mu(steep, (0.0, 10.0))


def test_contact_wrench():
    w = GR.ContactWrench.from_forces(0.5, 2.0)
    assert w.f == (0.5, 0.0, 2.0)
    assert w.ratio == pytest.approx(0.25, abs=1e-12)
    assert GR.ContactWrench.from_forces(0.1, 0.0).ratio is None
    with pytest.raises(GR.GraspError):
        GR.ContactWrench.from_forces(0.1, -1.0)


def test_classify_phase_examples():
    P = GR.ContactPhase
    assert GR.classify_phase(P.STABLE, 0.4, 0.0, 0.85, 0.1) is P.STABLE
    assert GR.classify_phase(P.INCIPIENT, 0.95, 0.0, 0.85, 0.1) is P.SLIPPING
    assert GR.classify_phase(P.SLIPPING, 0.86, 0.0, 0.85, 0.1) is P.RECOVERY
    assert GR.classify_phase(P.RECOVERY, 0.75, 0.0, 0.85, 0.1) is P.STABLE
    assert GR.classify_phase(P.RECOVERY, 0.87, 0.0, 0.85, 0.1) is P.RECOVERY
    assert GR.classify_phase(P.STABLE, None, 0.0, 0.85, 0.1) == GR.CONTACT_BROKEN
    with pytest.raises(GR.GraspError):
        GR.classify_phase(P.STABLE, 0.5, 0.0, 0.85, 0.0)


def test_classify_phase_slip_drop():
    # a fast fall out of the band means the contact yielded; a slow
    # drift out is a calm return to stable
    P = GR.ContactPhase
    assert GR.classify_phase(P.INCIPIENT, 0.70, -2.0, 0.85, 0.1) is P.SLIPPING
    assert GR.classify_phase(P.INCIPIENT, 0.70, -0.1, 0.85, 0.1) is P.STABLE
    assert GR.classify_phase(P.STABLE, 0.70, -2.0, 0.85, 0.1) is P.STABLE


def test_classify_phase_totality():
    # every (prev, ratio, dratio) combination maps to exactly one result
    P = GR.ContactPhase
    prevs = [None, GR.CONTACT_BROKEN, P.STABLE, P.INCIPIENT, P.SLIPPING,
             P.RECOVERY]
    allowed = set(P) | {GR.CONTACT_BROKEN}
    ratios = [None] + [round(0.01 * i, 2) for i in range(0, 161)]
    for prev in prevs:
        for ratio in ratios:
            for dr in (-2.0, 0.0, 2.0):
                out = GR.classify_phase(prev, ratio, dr, 0.85, 0.1)
                assert out in allowed
                again = GR.classify_phase(prev, ratio, dr, 0.85, 0.1)
                assert out == again


def _wrench_pair(r_l, r_r, fn=2.0):
    return (GR.ContactWrench.from_forces(r_l * fn, fn),
            GR.ContactWrench.from_forces(r_r * fn, fn))


def test_grip_controller_examples():
    w_l, w_r = _wrench_pair(0.95, 0.93)
    assert GR.grip_controller_step(w_l, w_r, 100.0, 0.1, 0.85) == 99.0
    w_l, w_r = _wrench_pair(0.5, 0.6)
    assert GR.grip_controller_step(w_l, w_r, 100.0, 0.1, 0.85) == 101.0
    w_l, w_r = _wrench_pair(0.95, 0.5)
    assert GR.grip_controller_step(w_l, w_r, 100.0, 0.1, 0.85) == 100.0
    # mechanical clamp on both ends
    w_l, w_r = _wrench_pair(0.95, 0.93)
    assert GR.grip_controller_step(w_l, w_r, 0.0, 0.1, 0.85) == 0.0
    w_l, w_r = _wrench_pair(0.5, 0.6)
    assert GR.grip_controller_step(w_l, w_r, 140.0, 0.1, 0.85) == 140.0
    broken = GR.ContactWrench.from_forces(0.0, 0.0)
    ok = GR.ContactWrench.from_forces(0.5, 2.0)
    with pytest.raises(GR.BrokenContact):
        GR.grip_controller_step(broken, ok, 100.0, 0.1, 0.85)


def test_controller_monotone_in_ratios():
    # raising either ratio never loosens the commanded grip
    rng = np.random.default_rng(7)
    for _ in range(300):
        r_l, r_r = rng.uniform(0.0, 1.6, size=2)
        bump = rng.uniform(0.0, 0.5)
        base = GR.grip_controller_step(*_wrench_pair(r_l, r_r), 70.0, 0.1, 0.85)
        upped = GR.grip_controller_step(*_wrench_pair(r_l + bump, r_r),
                                        70.0, 0.1, 0.85)
        assert upped <= base
        upped = GR.grip_controller_step(*_wrench_pair(r_l, r_r + bump),
                                        70.0, 0.1, 0.85)
        assert upped <= base


def test_controller_scale_invariance():
    # ratios, phases and commands depend on force direction, not scale
    rng = np.random.default_rng(11)
    for _ in range(200):
        ft, fn = rng.uniform(0.1, 5.0, size=2)
        c = rng.choice([0.1, 3.0, 100.0])
        assert GR.ContactWrench.from_forces(c * ft, c * fn).ratio == \
            pytest.approx(GR.ContactWrench.from_forces(ft, fn).ratio,
                          rel=1e-12)
        pair = _wrench_pair(ft / fn, ft / fn, fn=1.0)
        pair_c = _wrench_pair(ft / fn, ft / fn, fn=c)
        assert GR.grip_controller_step(*pair, 70.0, 0.1, 0.85) == \
            GR.grip_controller_step(*pair_c, 70.0, 0.1, 0.85)


def test_schedule_parsing(tmp_path):
    raw = [{"t": 0.0, "added_mass": 0.0}, {"t": 2.0, "added_mass": 0.1}]
    knots = GR.parse_schedule(raw)
    assert [k.t for k in knots] == [0.0, 2.0]
    assert GR.mass_at(knots, -1.0) == 0.0
    assert GR.mass_at(knots, 2.0) == 0.1
    assert GR.mass_at(knots, 99.0) == 0.1
    with pytest.raises(GR.GraspError, match="entry 1"):
        GR.parse_schedule([{"t": 5.0, "added_mass": 0.0},
                           {"t": 1.0, "added_mass": 0.1}])
    with pytest.raises(GR.GraspError, match="entry 0"):
        GR.parse_schedule([{"t": 0.0, "added_mass": -0.1}])
    with pytest.raises(GR.GraspError, match="entry 0"):
        GR.parse_schedule([{"t": 0.0}])
    with pytest.raises(GR.GraspError):
        GR.parse_schedule({"t": 0.0})
    p = tmp_path / "sched.json"
    p.write_text(json.dumps(raw))
    assert [k.added_mass for k in GR.load_schedule(p)] == [0.0, 0.1]
    p.write_text("not json")
    with pytest.raises(GR.GraspError):
        GR.load_schedule(p)


def test_staircase_schedule():
    knots = GR.staircase_schedule(0.05, t_start=2.0, n_steps=5, step_dt=0.2,
                                  t_unload=7.0)
    assert len(knots) == 7
    assert knots[0].added_mass == 0.0
    assert knots[-1].added_mass == 0.0 and knots[-1].t == 7.0
    assert knots[5].added_mass == pytest.approx(0.05)
    assert GR.mass_at(knots, 2.5) == pytest.approx(0.03)
    with pytest.raises(GR.GraspError):
        GR.staircase_schedule(0.05, n_steps=0)


def test_plant_validation():
    with pytest.raises(GR.GraspError):
        GR.GraspPlant(k_g=0.0)
    with pytest.raises(GR.GraspError):
        GR.GraspPlant(d_g0=150.0)
    with pytest.raises(GR.GraspError):
        GR.GraspPlant(object_mass=0.0)
    with pytest.raises(GR.GraspError):
        GR.GraspPlant(band_d=0.0)
    with pytest.raises(TypeError):
        GR.simulate_grasp("schedule.json", True)


def test_slip_onset_drop_is_exactly_kinetic():
    # in the tick slip starts, the tangential force lands exactly at the
    # kinetic level: the drop from static capacity is (mu_s - mu_k) * F_n
    model = GR.FrictionModel()
    plant = GR.GraspPlant()
    sched = [GR.LoadKnot(0.0, 0.0), GR.LoadKnot(1.0, 0.4)]
    tr = GR.simulate_grasp(sched, False, model, plant, duration=2.0)
    k = int(np.searchsorted(tr.t, 1.0))
    fn = tr.fl_n[k]
    load_before = (plant.object_mass) * GR.G
    assert tr.fl_t[k - 1] == load_before / 2.0          # stuck, even split
    assert tr.fl_t[k] == model.mu_k(fn) * fn            # kinetic, exact
    drop = model.mu_s(fn) * fn - tr.fl_t[k]
    assert drop == pytest.approx((model.mu_s(fn) - model.mu_k(fn)) * fn,
                                 abs=1e-12)
    assert tr.slide[k] > 0.0


def test_asymmetric_fingers_split_load():
    # a stiffer right finger carries more normal force; the stuck share
    # still splits the hung load evenly until capacity runs out
    plant = GR.GraspPlant(asym=1.2)
    tr = GR.simulate_grasp([], False, GR.FrictionModel(), plant, duration=1.0)
    assert np.allclose(tr.fr_n, 1.2 * tr.fl_n)
    assert np.allclose(tr.fl_t, tr.fr_t)
    assert tr.ratio_l[10] > tr.ratio_r[10]


def test_zero_load_minimal_force_seeking():
    # with only the object's own weight, the controller opens until the
    # ratio reaches the band and then holds
    model = GR.FrictionModel()
    plant = GR.GraspPlant()
    mu = GR.nominal_mu(model, plant.fn_working)
    tr = GR.simulate_grasp([], True, model, plant, duration=6.0)
    assert tr.intact.all()
    assert tr.d_g[-1] > tr.d_g[0]
    assert mu - plant.band_d / 2 <= tr.ratio_l[-1] <= mu + plant.band_d / 2
    tail = tr.d_g[-50:]
    assert tail.max() == tail.min()
    assert set(tr.phase_l[-50:]) <= {"stable", "incipient"}


def test_paired_runs_controller_effect():
    model = GR.FrictionModel()
    plant = GR.GraspPlant()
    mu = GR.nominal_mu(model, plant.fn_working)
    ramp = GR.staircase_schedule(0.05)
    on = GR.simulate_grasp(ramp, True, model, plant, duration=10.0)
    off = GR.simulate_grasp(ramp, False, model, plant, duration=10.0)
    co_on = on.crossover_seconds(mu, plant.band_d)
    co_off = off.crossover_seconds(mu, plant.band_d)
    assert co_off > 1.0
    assert co_on <= 0.5 * co_off
    assert on.intact.all()
    assert on.slide[-1] == 0.0
    # the uncontrolled trace walks the whole phase narrative
    seen = set(off.phase_l)
    assert {"stable", "incipient", "slipping", "recovery"} <= seen
    assert off.phase_l[-1] == "stable"

    heavy = GR.staircase_schedule(0.30, n_steps=6)
    off_heavy = GR.simulate_grasp(heavy, False, model, plant, duration=10.0)
    assert not off_heavy.grasp_intact
    assert off_heavy.slide.max() > plant.slide_limit

    # the plant is deterministic: identical arguments, identical trace
    off2 = GR.simulate_grasp(ramp, False, model, plant, duration=10.0)
    assert np.array_equal(off.d_g, off2.d_g)
    assert np.array_equal(off.fl_t, off2.fl_t)
    assert off.phase_l == off2.phase_l


def test_trace_csv_roundtrip(tmp_path):
    ramp = GR.staircase_schedule(0.05)
    tr = GR.simulate_grasp(ramp, True, duration=4.0)
    p = tmp_path / "grasp.csv"
    tr.to_csv(p)
    back = GR.GraspTrace.from_csv(p)
    assert len(back) == len(tr)
    assert np.allclose(back.t, tr.t, atol=1e-6)
    assert np.allclose(back.fl_t, tr.fl_t, atol=1e-6)
    assert np.allclose(back.d_g, tr.d_g, atol=1e-6)
    assert back.phase_l == tr.phase_l
    assert np.array_equal(back.intact, tr.intact)
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(GR.GraspError):
        GR.GraspTrace.from_csv(bad)


def test_crossover_seconds_counts_either_finger():
    t = np.arange(5) * 0.02
    nanv = float("nan")
    tr = GR.GraspTrace(
        t=t, fl_t=np.zeros(5), fl_n=np.ones(5), fr_t=np.zeros(5),
        fr_n=np.ones(5),
        ratio_l=np.array([0.5, 0.95, 0.5, nanv, 0.5]),
        ratio_r=np.array([0.5, 0.5, 0.95, nanv, 0.5]),
        phase_l=["stable"] * 5, phase_r=["stable"] * 5,
        d_g=np.full(5, 60.0), slide=np.zeros(5),
        intact=np.ones(5, dtype=bool))
    assert tr.crossover_seconds(0.85, 0.1) == pytest.approx(0.04)
    assert tr.grasp_intact
