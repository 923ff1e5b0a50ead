"""Event-driven front tracking: binary collisions resolved by local Riemann problems."""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, NamedTuple, Sequence

from .errors import AdmissibilityError, ContractError, EngineInvariantError
from .model import ModelSpec
from .riemann import Front, FrontKind, LatticeFunction, LState, initial_wavefans, riemann_fan

__all__ = [
    "CaseTag",
    "Collision",
    "InteractionRecord",
    "Trajectory",
    "Snapshot",
    "Replayer",
    "next_collision",
    "resolve_interaction",
    "interaction_case",
    "count_bounds",
    "run",
]

# relative tolerance under which two collision times count as simultaneous
TIME_RTOL = 1e-12


class CaseTag(str, Enum):
    CD_R1 = "CD_R1"
    CD_S1 = "CD_S1"
    R1_S1 = "R1_S1"
    S1_R1 = "S1_R1"
    S1_S1 = "S1_S1"

    @property
    def one_one(self) -> bool:
        return self in (CaseTag.R1_S1, CaseTag.S1_R1, CaseTag.S1_S1)


_CASES = {
    (FrontKind.CONTACT2, FrontKind.RARE1): CaseTag.CD_R1,
    (FrontKind.CONTACT2, FrontKind.SHOCK1): CaseTag.CD_S1,
    (FrontKind.RARE1, FrontKind.SHOCK1): CaseTag.R1_S1,
    (FrontKind.SHOCK1, FrontKind.RARE1): CaseTag.S1_R1,
    (FrontKind.SHOCK1, FrontKind.SHOCK1): CaseTag.S1_S1,
}


class Collision(NamedTuple):
    time: float
    position: float
    left: int
    right: int


def _same_time(a: float, b: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= TIME_RTOL * max(1.0, abs(a), abs(b))


def collision_of(a: Front, b: Front, t_now: float) -> Collision | None:
    """Meeting point of ``a`` (left) and ``b`` (right) after ``t_now``, if any."""
    if not a.speed > b.speed:
        return None
    xa, xb = a.x(t_now), b.x(t_now)
    gap = max(xb - xa, 0.0)
    dt = gap / (a.speed - b.speed)
    t = t_now + dt
    x = 0.5 * ((xa + a.speed * dt) + (xb + b.speed * dt))
    return Collision(t, x, a.id, b.id)


def next_collision(fronts: Sequence[Front], t_now: float = 0.0) -> Collision | None:
    """Earliest collision among adjacent pairs of position-sorted ``fronts``.

    Times within a relative 1e-12 are simultaneous; ties go to the smallest
    position, then the smallest left id.
    """
    cands = [c for a, b in zip(fronts, fronts[1:]) if (c := collision_of(a, b, t_now))]
    if not cands:
        return None
    t0 = min(c.time for c in cands)
    group = [c for c in cands if _same_time(c.time, t0)]
    return min(group, key=lambda c: (c.position, c.left))


def interaction_case(left: Front, right: Front) -> CaseTag:
    try:
        return _CASES[(left.kind, right.kind)]
    except KeyError:
        raise EngineInvariantError(
            f"impossible interaction {left.kind.value}-{right.kind.value} "
            f"(fronts {left.id}, {right.id})"
        ) from None


def resolve_interaction(
    m: ModelSpec, nu: int, left: Front, right: Front, x: float = 0.0, t: float = 0.0, next_id=None
) -> list[Front]:
    """Outgoing fan of a binary interaction: the Riemann problem of the outer states."""
    interaction_case(left, right)
    if left.right != right.left:
        raise EngineInvariantError(f"fronts {left.id} and {right.id} do not share a middle state")
    return riemann_fan(m, nu, left.left, right.right, x, t, next_id)


@dataclass
class InteractionRecord:
    index: int
    time: float
    position: float
    left_id: int
    right_id: int
    case: CaseTag
    u_minus: LState
    u_zero: LState
    u_plus: LState
    u_m: LState
    outgoing: list[Front]
    n1_after: int

    @property
    def outgoing_ids(self) -> list[int]:
        return [f.id for f in self.outgoing]


def count_bounds(lf: LatticeFunction) -> tuple[int, float]:
    """Closed-form bounds on 1-1 and 1-2 interaction counts.

    ``nu N Osc + N`` and ``(2N + N Osc)(nu N Osc + N)`` with Osc the
    oscillation of the lattice data (so ``nu Osc`` is an integer).
    """
    n = lf.n_breakpoints
    span = max(lf.k_values) - min(lf.k_values)
    b1 = n * span + n
    b2 = (2 * n + n * lf.oscillation) * b1
    return b1, b2


@dataclass
class Trajectory:
    model: ModelSpec
    nu: int
    initial: LatticeFunction
    t_max: float
    fronts: dict[int, Front] = field(default_factory=dict)
    initial_order: list[int] = field(default_factory=list)
    events: list[InteractionRecord] = field(default_factory=list)
    quiescent: bool = False

    @property
    def n1_initial(self) -> int:
        return sum(1 for i in self.initial_order if self.fronts[i].kind.is_one_wave)

    @property
    def n_one_one(self) -> int:
        return sum(1 for e in self.events if e.case.one_one)

    @property
    def n_one_two(self) -> int:
        return sum(1 for e in self.events if not e.case.one_one)

    @property
    def far_left(self) -> LState:
        return self.initial.states[0]

    def live_fronts(self) -> list[Front]:
        r = Replayer(self)
        r.apply_all(self.events)
        return [self.fronts[i] for i in r.order()]

    def snapshot(self, t: float) -> "Snapshot":
        return next(self.snapshots([t]))

    def snapshots(self, times: Iterable[float]) -> Iterator["Snapshot"]:
        """Snapshots at increasing ``times``; an event time is read just after the event."""
        r = Replayer(self)
        ev = iter(self.events)
        pending = next(ev, None)
        last = -math.inf
        for t in times:
            if not (0.0 <= t <= self.t_max):
                raise ContractError(f"snapshot time {t!r} outside [0, {self.t_max}]")
            if t < last:
                raise ContractError("snapshot times must be non-decreasing")
            last = t
            while pending is not None and pending.time <= t:
                r.apply(pending)
                pending = next(ev, None)
            ids = r.order()
            fr = [self.fronts[i] for i in ids]
            states = [self.far_left] + [f.right for f in fr]
            yield Snapshot(t, self.nu, [f.x(t) for f in fr], ids, states)


@dataclass
class Snapshot:
    t: float
    nu: int
    positions: list[float]
    ids: list[int]
    states: list[LState]  # len(positions) + 1

    @property
    def k_values(self) -> list[int]:
        return [s.k for s in self.states]

    @property
    def z_values(self) -> list[float]:
        return [s.z for s in self.states]

    def compact(self) -> tuple[list[float], list[LState]]:
        """Breakpoints and states with zero-width pieces and repeated states removed."""
        xs: list[float] = []
        st: list[LState] = [self.states[0]]
        for x, s in zip(self.positions, self.states[1:]):
            if xs and x <= xs[-1]:
                st[-1] = s
            else:
                xs.append(x)
                st.append(s)
        out_x: list[float] = []
        out_s = [st[0]]
        for x, s in zip(xs, st[1:]):
            if s != out_s[-1]:
                out_x.append(x)
                out_s.append(s)
        return out_x, out_s


class Replayer:
    """Linked list of live front ids, advanced one interaction at a time."""

    HEAD = -1
    TAIL = -2

    def __init__(self, traj: Trajectory):
        self.nxt: dict[int, int] = {}
        self.prv: dict[int, int] = {}
        self._link([self.HEAD, *traj.initial_order, self.TAIL])

    def _link(self, ids: Sequence[int]) -> None:
        for a, b in zip(ids, ids[1:]):
            self.nxt[a] = b
            self.prv[b] = a

    def splice(self, left: int, right: int, new: Sequence[int]) -> tuple[int, int]:
        if self.nxt.get(left) != right:
            raise EngineInvariantError(f"fronts {left} and {right} are not adjacent")
        p, n = self.prv.pop(left), self.nxt.pop(right)
        del self.nxt[left], self.prv[right]
        self._link([p, *new, n])
        return p, n

    def apply(self, e: InteractionRecord) -> tuple[int, int]:
        return self.splice(e.left_id, e.right_id, e.outgoing_ids)

    def apply_all(self, events: Iterable[InteractionRecord]) -> None:
        for e in events:
            self.apply(e)

    def order(self) -> list[int]:
        out = []
        i = self.nxt[self.HEAD]
        while i != self.TAIL:
            out.append(i)
            i = self.nxt[i]
        return out


def run(m: ModelSpec, lf: LatticeFunction, t_max: float) -> Trajectory:
    """Track fronts from the lattice data until ``t_max`` or until no collision is pending.

    Simultaneous collisions are resolved pairwise from left to right within
    one timestamp.  Every new state must stay in the model's admissible ball.
    """
    if not t_max > 0:
        raise ContractError("t_max must be positive")
    nu = lf.nu
    ids = itertools.count()
    traj = Trajectory(m, nu, lf, t_max)
    try:
        fans = initial_wavefans(lf, m, ids.__next__)
    except AdmissibilityError as exc:
        exc.trajectory = traj
        raise
    order = [f for fan in fans for f in fan]
    for f in order:
        traj.fronts[f.id] = f
    traj.initial_order = [f.id for f in order]

    b1, b2 = count_bounds(lf)
    max_events = b1 + b2
    links = Replayer(traj)
    nxt = links.nxt
    fronts = traj.fronts
    heap: list[tuple[float, float, int, int]] = []

    def push(a: int, b: int, t_now: float) -> None:
        if a < 0 or b < 0:
            return
        c = collision_of(fronts[a], fronts[b], t_now)
        if c is not None:
            heapq.heappush(heap, (max(c.time, t_now), c.position, a, b))

    def valid(item) -> bool:
        _, _, a, b = item
        return fronts[a].death_time == math.inf and nxt.get(a) == b

    for a, b in zip(order, order[1:]):
        push(a.id, b.id, 0.0)

    n1 = traj.n1_initial
    t_now = 0.0
    try:
        while heap:
            first = heapq.heappop(heap)
            if not valid(first):
                continue
            group = [first]
            while heap and _same_time(heap[0][0], first[0]):
                item = heapq.heappop(heap)
                if valid(item):
                    group.append(item)
            group.sort(key=lambda it: (it[1], it[2]))
            t, x, a_id, b_id = group[0]
            for item in group[1:]:
                heapq.heappush(heap, item)
            if t > t_max:
                break
            t = max(t, t_now)
            t_now = t
            a, b = fronts[a_id], fronts[b_id]
            case = interaction_case(a, b)
            out = resolve_interaction(m, nu, a, b, x, t, ids.__next__)
            a.death_time = b.death_time = t
            for f in out:
                fronts[f.id] = f
            p, n = links.splice(a_id, b_id, [f.id for f in out])
            n1 += sum(f.kind.is_one_wave for f in out)
            n1 -= a.kind.is_one_wave + b.kind.is_one_wave
            ones = [f for f in out if f.kind.is_one_wave]
            u_m = ones[-1].right if ones else a.left
            traj.events.append(
                InteractionRecord(
                    len(traj.events), t, x, a_id, b_id, case,
                    a.left, a.right, b.right, u_m, out, n1,
                )
            )
            if len(traj.events) > max_events:
                raise EngineInvariantError(
                    f"event count {len(traj.events)} exceeds the bound {max_events}"
                )
            if out:
                push(p, out[0].id, t)
                push(out[-1].id, n, t)
            else:
                push(p, n, t)
        else:
            traj.quiescent = True
    except (AdmissibilityError, EngineInvariantError) as exc:
        exc.trajectory = traj
        raise
    return traj
