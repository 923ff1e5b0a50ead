import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_run
from wavefront.engine import (
    CaseTag,
    count_bounds,
    interaction_case,
    next_collision,
    resolve_interaction,
    run,
)
from wavefront.errors import AdmissibilityError, ContractError, EngineInvariantError
from wavefront.model import ModelSpec
from wavefront.riemann import Front, FrontKind, LatticeFunction, LState, riemann_fan
from wavefront.variation import tvs_lattice_units


def _front(i, kind, x, speed, left=LState(0, 0.0), right=LState(0, 0.0)):
    return Front(i, kind, x, 0.0, speed, left, right)


def test_next_collision_kinematics():
    a = _front(0, FrontKind.SHOCK1, 0.0, 1.0)
    b = _front(1, FrontKind.SHOCK1, 1.0, -1.0)
    c = next_collision([a, b])
    assert c.time == pytest.approx(0.5) and c.position == pytest.approx(0.5)
    assert (c.left, c.right) == (0, 1)


def test_next_collision_parallel():
    fr = [_front(i, FrontKind.SHOCK1, float(i), -1.0) for i in range(4)]
    assert next_collision(fr) is None


def test_next_collision_tie_goes_left():
    # three fronts reach x = 0 at t = 1
    fr = [
        _front(0, FrontKind.SHOCK1, -1.0, 1.0),
        _front(1, FrontKind.SHOCK1, 0.0, 0.0),
        _front(2, FrontKind.SHOCK1, 1.0, -1.0),
    ]
    c = next_collision(fr)
    assert (c.left, c.right) == (0, 1)
    assert c.time == pytest.approx(1.0)


def _pair(m, nu, a_left, a_right, b_right):
    a = riemann_fan(m, nu, a_left, a_right)
    b = riemann_fan(m, nu, a_right, b_right)
    assert len(a) == 1 and len(b) == 1
    return a[0], b[0]


def test_s1_s1_merge():
    m = ModelSpec(r=0.6)
    u0 = LState(-2, m.shock_z_jump(-0.2))
    up = LState(-5, u0.z + m.shock_z_jump(-0.3))
    assert up.z == pytest.approx(0.035)
    a, b = _pair(m, 10, LState(0, 0.0), u0, up)
    assert interaction_case(a, b) is CaseTag.S1_S1
    out = resolve_interaction(m, 10, a, b)
    assert [f.kind for f in out] == [FrontKind.SHOCK1, FrontKind.CONTACT2]
    assert out[0].w_strength == -5
    assert out[0].right.z == pytest.approx(0.125)
    assert out[1].z_strength == pytest.approx(-0.09)


def test_r1_s1_full_cancellation(model):
    up = LState(0, model.shock_z_jump(-0.1))
    a, b = _pair(model, 10, LState(0, 0.0), LState(1, 0.0), up)
    assert interaction_case(a, b) is CaseTag.R1_S1
    out = resolve_interaction(model, 10, a, b)
    assert [f.kind for f in out] == [FrontKind.CONTACT2]
    assert out[0].z_strength == pytest.approx(0.001)


def test_cd_s1_keeps_strength(model):
    u0 = LState(0, 0.0)
    up = LState(-2, model.shock_z_jump(-0.2))
    a, b = _pair(model, 10, LState(0, 0.04), u0, up)
    assert interaction_case(a, b) is CaseTag.CD_S1
    out = resolve_interaction(model, 10, a, b)
    assert [f.kind for f in out] == [FrontKind.SHOCK1, FrontKind.CONTACT2]
    assert out[0].w_strength == b.w_strength
    assert out[0].right.z == pytest.approx(0.048)
    assert out[1].z_strength == pytest.approx(-0.04)


def test_cd_r1_keeps_strength(model):
    a, b = _pair(model, 10, LState(0, 0.1), LState(0, 0.0), LState(1, 0.0))
    out = resolve_interaction(model, 10, a, b)
    assert interaction_case(a, b) is CaseTag.CD_R1
    assert [f.kind for f in out] == [FrontKind.RARE1, FrontKind.CONTACT2]
    assert out[0].w_strength == 1
    assert out[0].left.z == 0.1


@pytest.mark.parametrize(
    "kinds",
    [
        (FrontKind.CONTACT2, FrontKind.CONTACT2),
        (FrontKind.RARE1, FrontKind.RARE1),
        (FrontKind.RARE1, FrontKind.CONTACT2),
        (FrontKind.SHOCK1, FrontKind.CONTACT2),
    ],
)
def test_impossible_pairs(kinds):
    a = _front(0, kinds[0], 0.0, 0.0)
    b = _front(1, kinds[1], 1.0, 0.0)
    with pytest.raises(EngineInvariantError):
        interaction_case(a, b)


def test_mismatched_middle_state(model):
    a = riemann_fan(model, 10, LState(0, 0.0), LState(-1, model.shock_z_jump(-0.1)))[0]
    b = riemann_fan(model, 10, LState(-1, 0.0), LState(-2, model.shock_z_jump(-0.1)))[0]
    with pytest.raises(EngineInvariantError):
        resolve_interaction(model, 10, a, b)


def test_single_riemann_datum_no_interactions(model):
    lf = LatticeFunction((0.0,), (1, -1), (0.0, 0.1), 10)
    traj = run(model, lf, 100.0)
    assert traj.events == [] and traj.quiescent
    snap = traj.snapshot(50.0)
    for f_id, x in zip(snap.ids, snap.positions):
        f = traj.fronts[f_id]
        assert x == pytest.approx(f.speed * 50.0)


def two_shock_lf(m, nu=10):
    g = m.shock_z_jump(-0.1)
    return LatticeFunction((0.0, 1.0), (1, 0, -1), (0.0, g, 2 * g), nu)


def test_two_shocks_merge_once(model):
    traj = run(model, two_shock_lf(model), 100.0)
    assert [e.case for e in traj.events] == [CaseTag.S1_S1]
    e = traj.events[0]
    assert e.time == pytest.approx(10.0)
    assert e.position == pytest.approx(-9.5)
    assert traj.quiescent


def test_snapshot_contract(model):
    lf = two_shock_lf(model)
    traj = run(model, lf, 100.0)
    xs, st = traj.snapshot(0.0).compact()
    assert xs == list(lf.breakpoints)
    assert st == lf.states
    with pytest.raises(ContractError):
        traj.snapshot(101.0)
    with pytest.raises(ContractError):
        list(traj.snapshots([5.0, 1.0]))
    with pytest.raises(ContractError):
        run(model, lf, 0.0)


def test_admissibility_abort_keeps_partial_run():
    m = ModelSpec()
    g1 = m.shock_z_jump(-0.25)
    lf = LatticeFunction((0.0, 1.0), (1, 0, -1), (0.2, 0.2 + g1, 0.2 + 2 * g1), 4)
    with pytest.raises(AdmissibilityError) as ei:
        run(m, lf, 100.0)
    assert ei.value.time == pytest.approx(4.0)
    assert ei.value.trajectory.initial is lf
    assert ei.value.trajectory.events == []


def _coarse(xs, states, tol=1e-5):
    """Drop pieces narrower than ``tol`` (the perturbation scale)."""
    out_x, out_s = [], [states[0]]
    for x, s in zip(xs, states[1:]):
        if out_x and x - out_x[-1] < tol:
            out_s[-1] = s
            continue
        out_x.append(x)
        out_s.append(s)
    return out_x, out_s


def test_simultaneous_triple_matches_perturbed_order(model):
    # three shocks of -0.1 that all meet at (t, x) = (10, -8.5)
    g = model.shock_z_jump(-0.1)
    ks = (2, 1, 0, -1)
    zs = tuple(i * g for i in range(4))
    lf = LatticeFunction((0.0, 1.0, 2.0), ks, zs, 10)
    traj = run(model, lf, 200.0)
    assert traj.events[0].time == pytest.approx(10.0)
    assert [e.time for e in traj.events] == pytest.approx([10.0] * len(traj.events))
    assert sum(e.case is CaseTag.S1_S1 for e in traj.events) == 2

    for eps in (1e-7, -1e-7):
        lf_p = LatticeFunction((0.0, 1.0 + eps, 2.0), ks, zs, 10)
        traj_p = run(model, lf_p, 200.0)
        xa, sa = _coarse(*traj.snapshot(200.0).compact())
        xb, sb = _coarse(*traj_p.snapshot(200.0).compact())
        assert [s.k for s in sa] == [s.k for s in sb]
        assert [s.z for s in sa] == pytest.approx([s.z for s in sb], abs=1e-12)
        assert xa == pytest.approx(xb, abs=1e-5)


def test_count_bounds_formula():
    lf = LatticeFunction((0.0, 1.0, 2.0), (0, 3, -1, 0), (0.0,) * 4, 10)
    b1, b2 = count_bounds(lf)
    assert b1 == 3 * 4 + 3
    assert b2 == pytest.approx((2 * 3 + 3 * 0.4) * b1)


@settings(max_examples=15)
@given(st.integers(0, 10_000), st.sampled_from([10, 20]), st.integers(2, 40))
def test_random_runs_respect_engine_invariants(seed, nu, count):
    traj = random_run(seed, nu, count)
    assert traj.quiescent
    b1, b2 = count_bounds(traj.initial)
    assert traj.n_one_one <= b1 and traj.n_one_two <= b2
    times = [e.time for e in traj.events]
    assert times == sorted(times)
    # w sup norm and TV^s never grow
    snaps = list(traj.snapshots([0.0] + times + [traj.t_max]))
    sup = [max(abs(k) for k in s.k_values) for s in snaps]
    assert all(b <= a for a, b in zip(sup, sup[1:]))
    for s in (1 / 3, 1 / 2, 1.0):
        tv = [tvs_lattice_units(sn.k_values, s) for sn in snaps]
        assert all(b <= a for a, b in zip(tv, tv[1:]))
    for e in traj.events:
        ones = [f for f in e.outgoing if f.kind.is_one_wave]
        if e.case.one_one:
            assert all(f.kind is FrontKind.SHOCK1 for f in ones)
            assert len(ones) <= 1
        assert all(type(st_.k) is int for f in e.outgoing for st_ in (f.left, f.right))
