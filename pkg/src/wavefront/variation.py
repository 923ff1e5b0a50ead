"""Fractional variation TV^s and the BV^s semi-norm / norm.

For ``0 < s <= 1`` and ``p = 1/s`` the variation of a finite sequence is the
supremum over sub-sequences (subdivisions) of the sum of ``|increment|**p``.
Interior points of a strictly monotone run never belong to an optimal
subdivision, so the sequence is first reduced to its extrema and the
maximisation is then an exact O(m^2) dynamic programme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "StepFunction",
    "exponent_p",
    "reduce_to_extrema",
    "power",
    "tvs_exact",
    "tvs_lattice_units",
    "tvs_lattice",
    "tvs_on_interval",
    "bvs_seminorm",
    "bvs_norm",
]


def exponent_p(s: float) -> float:
    """Return ``p = 1/s`` after checking ``0 < s <= 1``."""
    if not (0.0 < s <= 1.0) or math.isnan(s):
        raise ValueError(f"variation exponent s must lie in (0, 1], got {s!r}")
    return 1.0 / s


def power(delta: float, p: float) -> float:
    """``|delta|**p`` evaluated as ``exp(p log|delta|)``.

    Zero short-circuits to zero and ``p == 1`` returns ``|delta|`` unchanged so
    that classical total variation is computed without exp/log round-off.
    """
    d = abs(delta)
    if d == 0.0:
        return 0.0
    if p == 1.0:
        return d
    return math.exp(p * math.log(d))


def reduce_to_extrema(values: Sequence[float]) -> list[float]:
    """Keep the endpoints and the strict local extrema of ``values``.

    Runs of equal adjacent values are collapsed first.  The fractional
    variation of the result equals that of the input for every ``s``.
    """
    collapsed: list[float] = []
    for v in values:
        if not collapsed or v != collapsed[-1]:
            collapsed.append(v)
    if len(collapsed) <= 2:
        return collapsed
    out = [collapsed[0]]
    for i in range(1, len(collapsed) - 1):
        a, b, c = collapsed[i - 1], collapsed[i], collapsed[i + 1]
        # sign comparison, not a product: tiny differences would underflow
        if (b > a) == (b > c):
            out.append(b)
    out.append(collapsed[-1])
    return out


def _check_finite(values: Sequence[float]) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"non-finite value in sequence: {v!r}")


def tvs_exact(values: Sequence[float], s: float) -> float:
    """Exact TV^s of a finite sequence.

    ``f(i) = max_j<i (|u_i - u_j|**p + f(j))`` on the extrema of ``values``,
    with ``f(i) = 0`` allowed as the start of a chain.
    """
    p = exponent_p(s)
    _check_finite(values)
    u = reduce_to_extrema(values)
    m = len(u)
    if m <= 1:
        return 0.0
    f = [0.0] * m
    best = 0.0
    for i in range(1, m):
        ui = u[i]
        fi = 0.0
        for j in range(i):
            cand = f[j] + power(ui - u[j], p)
            if cand > fi:
                fi = cand
        f[i] = fi
        if fi > best:
            best = fi
    return best


def _integer_power(p: float) -> int | None:
    q = round(p)
    return int(q) if abs(p - q) < 1e-12 else None


def tvs_lattice_units(ks: Sequence[int], s: float) -> int | float:
    """TV^s of lattice values ``k/nu`` expressed in units of ``nu**-p``.

    When ``p`` is an integer (s in {1, 1/2, 1/3, ...}) the result is an exact
    Python int, so comparisons between profiles carry no rounding at all.
    """
    p = exponent_p(s)
    k = np.asarray(reduce_to_extrema([int(v) for v in ks]), dtype=np.int64)
    m = len(k)
    if m <= 1:
        return 0
    span = int(k.max() - k.min())
    q = _integer_power(p)
    if q is not None:
        table = np.arange(span + 1, dtype=np.int64) ** q
        f = np.zeros(m, dtype=np.int64)
    else:
        table = np.array([power(float(d), p) for d in range(span + 1)])
        f = np.zeros(m, dtype=float)
    for i in range(1, m):
        f[i] = (f[:i] + table[np.abs(k[i] - k[:i])]).max()
    best = f.max()
    return int(best) if q is not None else float(best)


def tvs_lattice(ks: Sequence[int], nu: int, s: float) -> float:
    """TV^s of the lattice values ``k/nu``."""
    p = exponent_p(s)
    return tvs_lattice_units(ks, s) / float(nu) ** p


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant function on the real line.

    ``values[0]`` holds on ``(-inf, breakpoints[0])``, ``values[i]`` on
    ``(breakpoints[i-1], breakpoints[i])`` and ``values[-1]`` to the right of
    the last breakpoint.
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(self.breakpoints) + 1:
            raise ValueError("need exactly one more value than breakpoints")
        if any(b >= a for a, b in zip(self.breakpoints[1:], self.breakpoints)):
            raise ValueError("breakpoints must be strictly increasing")
        _check_finite(self.values)

    @classmethod
    def constant(cls, c: float) -> "StepFunction":
        return cls((), (float(c),))

    def values_on(self, a: float, b: float) -> list[float]:
        """Values taken on the open interval ``(a, b)`` in spatial order."""
        if not a < b:
            return []
        out = []
        for i, v in enumerate(self.values):
            lo = self.breakpoints[i - 1] if i > 0 else -math.inf
            hi = self.breakpoints[i] if i < len(self.breakpoints) else math.inf
            if lo < b and hi > a:
                out.append(v)
        return out

    def sup_norm(self) -> float:
        return max(abs(v) for v in self.values)


def tvs_on_interval(f: StepFunction, a: float, b: float, s: float) -> float:
    """TV^s of ``f`` restricted to ``(a, b)``; zero for an empty interval."""
    return tvs_exact(f.values_on(a, b), s)


def _as_values(f) -> Sequence[float]:
    return f.values if isinstance(f, StepFunction) else f


def bvs_seminorm(f, s: float) -> float:
    """``(TV^s f)**s`` for a StepFunction or a plain sequence of values."""
    return tvs_exact(_as_values(f), s) ** s


def bvs_norm(f, s: float) -> float:
    vals = _as_values(f)
    sup = max((abs(v) for v in vals), default=0.0)
    return sup + bvs_seminorm(vals, s)
