"""Approximate Riemann solver on the lattice w in Z/nu and initial-data quantization."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator, NamedTuple, Sequence

from .errors import AdmissibilityError, ContractError
from .model import ModelSpec, State
from .variation import StepFunction, tvs_exact, tvs_lattice

__all__ = [
    "FrontKind",
    "LState",
    "Front",
    "LatticeFunction",
    "DiscretizationReport",
    "riemann_fan",
    "solve_riemann",
    "discretize_initial",
    "initial_wavefans",
    "to_lattice",
]

# slack used when rounding nu*w onto the lattice; keeps 0.29*100 -> 29
_LATTICE_EPS = 1e-9


class FrontKind(str, Enum):
    SHOCK1 = "Shock1"
    RARE1 = "Rare1"
    CONTACT2 = "Contact2"

    @property
    def is_one_wave(self) -> bool:
        return self is not FrontKind.CONTACT2


class LState(NamedTuple):
    """State with ``w = k/nu`` stored as the exact lattice index ``k``."""

    k: int
    z: float

    def w(self, nu: int) -> float:
        return self.k / nu


@dataclass(eq=False)
class Front:
    id: int
    kind: FrontKind
    position: float  # at birth_time
    birth_time: float
    speed: float
    left: LState
    right: LState
    death_time: float = math.inf

    def x(self, t: float) -> float:
        return self.position + self.speed * (t - self.birth_time)

    @property
    def w_strength(self) -> int:
        return self.right.k - self.left.k

    @property
    def z_strength(self) -> float:
        return self.right.z - self.left.z

    def alive(self, t: float) -> bool:
        return self.birth_time <= t < self.death_time


def to_lattice(w: float, nu: int) -> int:
    """Exact lattice index of ``w``; raises if ``w`` is not on Z/nu."""
    k = round(w * nu)
    if abs(k - w * nu) > 1e-9:
        raise ContractError(f"w={w!r} is not on the lattice Z/{nu}")
    return int(k)


def _require_ball(m: ModelSpec, nu: int, st: LState, t: float, x: float) -> None:
    if not m.in_ball(st.k / nu, st.z):
        raise AdmissibilityError(
            f"state (w={st.k}/{nu}, z={st.z!r}) left the admissible ball r={m.r} at t={t!r}, x={x!r}",
            time=t,
            position=x,
        )


def riemann_fan(
    m: ModelSpec,
    nu: int,
    left: LState,
    right: LState,
    x: float = 0.0,
    t: float = 0.0,
    next_id: Callable[[], int] | None = None,
) -> list[Front]:
    """Fronts leaving ``(x, t)`` for the Riemann datum ``left | right``.

    A single 1-shock or ``k+`` rarefaction fronts of one lattice step each,
    followed by the 2-contact; zero-strength waves are not emitted.
    """
    if next_id is None:
        next_id = itertools.count().__next__
    _require_ball(m, nu, left, t, x)
    _require_ball(m, nu, right, t, x)
    fronts: list[Front] = []
    dk = right.k - left.k
    if dk < 0:
        mid = LState(right.k, left.z + m.shock_z_jump(dk / nu))
        _require_ball(m, nu, mid, t, x)
        speed = m.shock_speed(State(left.k / nu, left.z), State(mid.k / nu, mid.z))
        fronts.append(Front(next_id(), FrontKind.SHOCK1, x, t, speed, left, mid))
    else:
        mid = LState(right.k, left.z)
        for i in range(1, dk + 1):
            a = LState(left.k + i - 1, left.z)
            b = LState(left.k + i, left.z)
            speed = m.lambda1(b.k / nu, left.z)
            fronts.append(Front(next_id(), FrontKind.RARE1, x, t, speed, a, b))
    if right.z != mid.z:
        speed = m.lambda2(right.k / nu)
        fronts.append(Front(next_id(), FrontKind.CONTACT2, x, t, speed, mid, right))
    return fronts


def solve_riemann(
    m: ModelSpec, left: State, right: State, nu: int, x: float = 0.0, t: float = 0.0
) -> list[Front]:
    """Riemann solver for real-valued states whose w lie on Z/nu."""
    return riemann_fan(
        m, nu, LState(to_lattice(left.w, nu), left.z), LState(to_lattice(right.w, nu), right.z), x, t
    )


@dataclass(frozen=True)
class LatticeFunction:
    """Piecewise-constant (w, z) with ``w = k/nu``; adjacent pieces differ."""

    breakpoints: tuple[float, ...]
    k_values: tuple[int, ...]
    z_values: tuple[float, ...]
    nu: int

    def __post_init__(self):
        n = len(self.breakpoints)
        if len(self.k_values) != n + 1 or len(self.z_values) != n + 1:
            raise ValueError("need one more value than breakpoints")
        for i in range(n):
            if self.k_values[i] == self.k_values[i + 1] and self.z_values[i] == self.z_values[i + 1]:
                raise ValueError(f"pieces {i} and {i + 1} carry the same state")

    @property
    def states(self) -> list[LState]:
        return [LState(k, z) for k, z in zip(self.k_values, self.z_values)]

    @property
    def w_values(self) -> list[float]:
        return [k / self.nu for k in self.k_values]

    def w_function(self) -> StepFunction:
        return StepFunction(tuple(self.breakpoints), tuple(self.w_values))

    def z_function(self) -> StepFunction:
        return StepFunction(tuple(self.breakpoints), tuple(self.z_values))

    @property
    def n_breakpoints(self) -> int:
        return len(self.breakpoints)

    @property
    def oscillation(self) -> float:
        return (max(self.k_values) - min(self.k_values)) / self.nu

    def to_dict(self) -> dict:
        return {
            "nu": self.nu,
            "breakpoints": list(self.breakpoints),
            "k": list(self.k_values),
            "z": list(self.z_values),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LatticeFunction":
        return cls(tuple(d["breakpoints"]), tuple(d["k"]), tuple(d["z"]), d["nu"])


@dataclass
class DiscretizationReport:
    nu: int
    tvs_before: dict[str, float] = field(default_factory=dict)
    tvs_after: dict[str, float] = field(default_factory=dict)
    sup_w_before: float = 0.0
    sup_w_after: float = 0.0
    sup_z: float = 0.0
    osc_before: float = 0.0
    osc_after: float = 0.0
    l1_error: float = 0.0
    l1_bound: float = 0.0

    @property
    def l1_ok(self) -> bool:
        return self.l1_error <= self.l1_bound

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["l1_ok"] = self.l1_ok
        return d


def discretize_initial(
    x: Sequence[float],
    w: Sequence[float],
    z: Sequence[float],
    nu: int,
    s_list: Sequence[float] = (1 / 3, 1 / 2, 1.0),
) -> tuple[LatticeFunction, DiscretizationReport]:
    """Quantize sampled initial data onto the lattice.

    Samples follow the left-continuous convention: ``(w[i], z[i])`` holds on
    ``(x[i-1], x[i]]``, the first sample to the left of ``x[0]`` and the last
    to the right of ``x[-2]``.  ``w`` is mapped by ``k = floor(nu w)``, which keeps the value
    order; the oscillation may still grow by less than ``1/nu``, so the report
    records it.  ``z`` is kept as sampled.
    The L1 error is measured on ``[x[0], x[-1]]``.
    """
    if nu < 1:
        raise ContractError(f"nu must be a positive integer, got {nu!r}")
    if not (len(x) == len(w) == len(z)) or len(x) == 0:
        raise ContractError("x, w, z must be non-empty and of equal length")
    for name, arr in (("x", x), ("w", w), ("z", z)):
        for v in arr:
            if not math.isfinite(v):
                raise ContractError(f"non-finite sample in {name}: {v!r}")
    if any(b <= a for a, b in zip(x, x[1:])):
        raise ContractError("sample positions must be strictly increasing")

    ks = [math.floor(nu * v + _LATTICE_EPS) for v in w]
    bps: list[float] = []
    kv: list[int] = [ks[0]]
    zv: list[float] = [float(z[0])]
    for i in range(1, len(x)):
        if ks[i] == kv[-1] and z[i] == zv[-1]:
            continue
        bps.append(float(x[i - 1]))
        kv.append(ks[i])
        zv.append(float(z[i]))
    lf = LatticeFunction(tuple(bps), tuple(kv), tuple(zv), nu)

    rep = DiscretizationReport(nu=nu, l1_bound=1.0 / nu)
    for s in s_list:
        rep.tvs_before[_skey(s)] = tvs_exact(list(w), s)
        rep.tvs_after[_skey(s)] = tvs_lattice(kv, nu, s)
    rep.sup_w_before = max(abs(v) for v in w)
    rep.sup_w_after = max(abs(k) for k in kv) / nu
    rep.sup_z = max(abs(v) for v in z)
    rep.osc_before = max(w) - min(w)
    rep.osc_after = lf.oscillation
    rep.l1_error = sum(
        (x[i] - x[i - 1]) * (abs(w[i] - ks[i] / nu)) for i in range(1, len(x))
    )
    return lf, rep


def _skey(s: float) -> str:
    return f"{s:.6g}"


def initial_wavefans(
    lf: LatticeFunction, m: ModelSpec, next_id: Callable[[], int] | None = None
) -> list[list[Front]]:
    """One fan per breakpoint of the lattice data, all born at t = 0."""
    if next_id is None:
        next_id = itertools.count().__next__
    states = lf.states
    return [
        riemann_fan(m, lf.nu, states[i], states[i + 1], xb, 0.0, next_id)
        for i, xb in enumerate(lf.breakpoints)
    ]


def iter_fronts(fans: Sequence[Sequence[Front]]) -> Iterator[Front]:
    for fan in fans:
        yield from fan
