import math
import random

import pytest
from hypothesis import given, strategies as st

from conftest import brute_tvs
from wavefront.variation import (
    StepFunction,
    bvs_norm,
    bvs_seminorm,
    exponent_p,
    reduce_to_extrema,
    tvs_exact,
    tvs_lattice,
    tvs_lattice_units,
    tvs_on_interval,
)

S_VALUES = (1 / 3, 1 / 2, 1.0)
finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_exponent_rejects_out_of_range():
    for s in (0.0, -0.5, 1.5, float("nan")):
        with pytest.raises(ValueError):
            exponent_p(s)
    assert exponent_p(0.5) == 2.0


@pytest.mark.parametrize(
    "seq, expected",
    [([0, 1, 2, 1], [0, 2, 1]), ([5, 5, 5], [5]), ([0, 1, 0.5, 1.5], [0, 1, 0.5, 1.5]), ([], []), ([3], [3])],
)
def test_reduce_examples(seq, expected):
    assert reduce_to_extrema(seq) == expected


def test_tvs_examples():
    assert tvs_exact([0, 0.7], 1 / 3) == pytest.approx(0.7**3)
    assert tvs_exact([0, 1, 2], 0.5) == 4.0
    assert tvs_exact([0, 1, 0.5, 1.5], 0.5) == pytest.approx(2.25)
    assert tvs_exact([], 0.5) == 0.0
    assert tvs_exact([1.0], 0.5) == 0.0


def test_interval_and_norm_examples():
    f = StepFunction((0.0, 1.0, 2.0), (0.0, 1.0, 0.0, 1.0))
    assert tvs_on_interval(f, -1, 3, 0.5) == pytest.approx(3.0)
    assert tvs_on_interval(f, 0.2, 0.8, 0.5) == 0.0
    assert tvs_on_interval(f, 5, 6, 1.0) == 0.0
    assert tvs_on_interval(StepFunction((0.0,), (0.0, 1.0)), -1, 1, 1.0) == 1.0
    assert bvs_seminorm(f, 0.5) == pytest.approx(math.sqrt(3))
    assert bvs_seminorm(StepFunction.constant(0.0), 0.5) == 0.0
    assert bvs_norm(StepFunction.constant(0.0), 0.5) == 0.0
    for s in S_VALUES:
        assert bvs_seminorm(StepFunction((0.0,), (0.0, -0.37)), s) == pytest.approx(0.37)
    assert bvs_norm(f, 0.5) == pytest.approx(1 + math.sqrt(3))


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        tvs_exact([0.0, float("nan")], 0.5)


@given(st.lists(finite, max_size=9), st.sampled_from(S_VALUES))
def test_matches_brute_force(vals, s):
    assert tvs_exact(vals, s) == pytest.approx(brute_tvs(vals, s), rel=1e-12, abs=1e-12)


@given(st.lists(finite, max_size=30), st.sampled_from(S_VALUES))
def test_reduction_keeps_value(vals, s):
    assert tvs_exact(reduce_to_extrema(vals), s) == pytest.approx(tvs_exact(vals, s), rel=1e-12, abs=1e-12)


@given(st.lists(finite, min_size=2, max_size=30), st.sampled_from(S_VALUES))
def test_monotone_sequences_use_endpoints(vals, s):
    vals = sorted(vals)
    assert tvs_exact(vals, s) == pytest.approx(abs(vals[-1] - vals[0]) ** exponent_p(s), rel=1e-12, abs=1e-12)


@given(st.lists(finite, max_size=40))
def test_s1_is_classical_variation(vals):
    classical = sum(abs(b - a) for a, b in zip(vals, vals[1:]))
    assert tvs_exact(vals, 1.0) == pytest.approx(classical, rel=1e-12, abs=1e-12)


@given(st.lists(finite, min_size=1, max_size=20), st.data(), st.sampled_from(S_VALUES))
def test_deleting_points_never_increases(vals, data, s):
    i = data.draw(st.integers(0, len(vals) - 1))
    sub = vals[:i] + vals[i + 1:]
    assert tvs_exact(sub, s) <= tvs_exact(vals, s) * (1 + 1e-12) + 1e-12


@given(st.lists(st.integers(-40, 40), max_size=40), st.sampled_from(S_VALUES), st.integers(1, 50))
def test_lattice_agrees_with_float(ks, s, nu):
    exact = tvs_lattice(ks, nu, s)
    assert exact == pytest.approx(tvs_exact([k / nu for k in ks], s), rel=1e-9, abs=1e-12)
    if exponent_p(s).is_integer():
        assert isinstance(tvs_lattice_units(ks, s), int)


def test_dyadic_oracle_exact():
    rng = random.Random(7)
    for _ in range(200):
        vals = [rng.randint(-64, 64) / 64 for _ in range(rng.randint(0, 10))]
        for s in S_VALUES:
            assert tvs_exact(vals, s) == brute_tvs(vals, s)
