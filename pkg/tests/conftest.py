import itertools

import numpy as np
import pytest
from hypothesis import settings

from wavefront.engine import run
from wavefront.model import ModelSpec
from wavefront.riemann import discretize_initial
from wavefront.variation import exponent_p, power

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


def brute_tvs(values, s):
    """Sup over every subsequence, same power formula as the library."""
    p = exponent_p(s)
    n = len(values)
    best = 0.0
    for r in range(2, n + 1):
        for idx in itertools.combinations(range(n), r):
            tot = 0.0
            for a, b in zip(idx, idx[1:]):
                tot += power(abs(values[b] - values[a]), p)
            best = max(best, tot)
    return best


def random_samples(seed, count, amp=0.1):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0.0, 1.0, count + 1))
    w = rng.uniform(-amp, amp, count + 1)
    z = rng.uniform(-amp, amp, count + 1)
    w[0] = w[-1] = z[0] = z[-1] = 0.0
    return x.tolist(), w.tolist(), z.tolist()


def random_run(seed, nu, count, t_max=200.0, m=None):
    m = m or ModelSpec()
    lf, _ = discretize_initial(*random_samples(seed, count), nu)
    return run(m, lf, t_max)


@pytest.fixture
def model():
    return ModelSpec()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
