import json

import pytest

from conftest import random_run, random_samples
from wavefront.artifacts import events_text, read_events
from wavefront.engine import run
from wavefront.riemann import LatticeFunction
from wavefront.verify import (
    check_counts,
    check_interaction_algebra,
    check_lax_and_grid,
    check_tvs_monotone,
    check_z_linf,
    convergence_study,
    l1_distance,
    verify_trajectory,
)

CHECKS = {"tvs_monotone", "z_linf_budget", "counts", "lax_and_grid", "interaction_algebra", "characteristics"}


@pytest.fixture
def pure_cd(model):
    lf = LatticeFunction((0.0, 0.3, 0.9), (0, 0, 0, 0), (0.0, 0.05, -0.02, 0.0), 10)
    return run(model, lf, 20.0)


@pytest.fixture
def two_shock(model):
    g = model.shock_z_jump(-0.1)
    return run(model, LatticeFunction((0.0, 1.0), (1, 0, -1), (0.0, g, 2 * g), 10), 50.0)


def test_pure_cd(pure_cd):
    tv = check_tvs_monotone(pure_cd)
    assert tv.passed
    assert set(tv.details["tvs_initial"].values()) == {0.0}
    assert set(tv.details["tvs_final"].values()) == {0.0}
    z = check_z_linf(pure_cd)
    assert z.passed and z.measured == 0.05
    c = check_counts(pure_cd)
    assert c.passed and c.measured == {"n_one_one": 0, "n_one_two": 0}


def test_two_shock(two_shock):
    tv = check_tvs_monotone(two_shock)
    assert tv.passed and tv.measured <= 0
    for k, v in tv.details["tvs_final"].items():
        assert v <= tv.details["tvs_initial"][k]
    c = check_counts(two_shock)
    assert c.passed and c.measured["n_one_one"] == 1
    z = check_z_linf(two_shock)
    assert z.passed
    # the merged shock of -0.2 lifts z by at most 0.008 over the data
    assert z.measured - z.details["z0_sup"] <= 0.008
    assert check_lax_and_grid(two_shock).passed
    assert check_interaction_algebra(two_shock).passed


def test_single_shock_bound(model):
    traj = run(model, LatticeFunction((0.0,), (0, -2), (0.0, 0.0), 10), 10.0)
    z = check_z_linf(traj)
    assert z.passed
    assert z.measured == pytest.approx(0.008)
    assert z.bound >= 0.008


def test_full_report_on_random_run():
    traj = random_run(11, 20, 60)
    rep = verify_trajectory(traj, snapshot_times=[0.0, 1.0, 10.0])
    assert set(rep.entries) == CHECKS
    assert rep.passed, rep.failures()
    assert rep.exit_code == 0
    d = rep.to_dict()
    for e in d.values():
        assert set(e) >= {"verdict", "measured", "bound", "tolerance", "worst_location"}


def test_verification_is_pure_and_reproducible(tmp_path):
    traj = random_run(3, 10, 30)
    before = events_text(traj, {})
    a = verify_trajectory(traj).to_dict()
    assert events_text(traj, {}) == before
    p = tmp_path / "events.jsonl"
    p.write_text(before)
    rebuilt, _ = read_events(p)
    b = verify_trajectory(rebuilt).to_dict()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def _corrupt(tmp_path, traj, edit):
    lines = events_text(traj, {}).splitlines()
    recs = [json.loads(line) for line in lines]
    edit(recs)
    p = tmp_path / "events.jsonl"
    p.write_text("\n".join(json.dumps(r) for r in recs) + "\n")
    return read_events(p)[0]


def test_corrupted_shock_speed_located(tmp_path, two_shock):
    def edit(recs):
        ev = recs[1]
        ev["outgoing"][0]["speed"] = 0.5

    bad = _corrupt(tmp_path, two_shock, edit)
    e = check_lax_and_grid(bad)
    assert not e.passed
    assert e.worst_location["front"] == two_shock.events[0].outgoing[0].id
    assert "Lax" in e.worst_location["reason"]


def test_corrupted_strength_located(tmp_path, two_shock):
    def edit(recs):
        out = recs[1]["outgoing"]
        out[0]["right"][0] = -3
        out[1]["left"][0] = -3

    bad = _corrupt(tmp_path, two_shock, edit)
    e = check_interaction_algebra(bad)
    assert not e.passed
    assert e.worst_location["event"] == 0
    assert not verify_trajectory(bad).passed


def test_z_growth_outside_shock_cases_flagged(tmp_path, model):
    lf = LatticeFunction((0.0, 1.0), (0, 1, 0), (0.0, 0.0, model.shock_z_jump(-0.1)), 10)
    traj = run(model, lf, 100.0)

    def edit(recs):
        recs[1]["outgoing"][0]["right"][1] = 0.2
        recs[1]["u_plus"][1] = 0.2

    bad = _corrupt(tmp_path, traj, edit)
    e = check_z_linf(bad)
    assert not e.passed
    assert e.worst_location["case"] == "R1_S1"


def test_l1_distance():
    assert l1_distance([0.0], [0.0, 1.0], [0.5], [0.0, 1.0], -1, 1) == pytest.approx(0.5)
    assert l1_distance([], [2.0], [], [2.0], -5, 5) == 0.0


def test_convergence_identical_and_pure_cd(model):
    x, w, z = random_samples(2, 10)
    rep = convergence_study(model, x, w, z, [20, 20], [1.0], 10.0)
    assert rep.rows[0]["l1_w"] == 0.0 and rep.rows[0]["l1_z"] == 0.0
    rep = convergence_study(model, x, [0.0] * len(w), z, [10, 20, 40], [0.5, 2.0], 10.0)
    assert all(r["l1_w"] == 0.0 and r["l1_z"] == 0.0 for r in rep.rows)


def test_convergence_table_shape(model):
    x, w, z = random_samples(9, 20)
    rep = convergence_study(model, x, w, z, [10, 20, 40, 80], [1.0], 20.0)
    assert [(r["nu_a"], r["nu_b"]) for r in rep.rows] == [(10, 20), (20, 40), (40, 80)]
    assert isinstance(rep.trend_flags, list)
    with pytest.raises(ValueError):
        convergence_study(model, x, w, z, [20, 10], [1.0], 20.0)
