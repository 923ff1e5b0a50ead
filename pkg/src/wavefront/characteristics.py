"""Forward generalized 2-characteristics of a finished trajectory.

Between 1-fronts the solution is constant, so a 2-characteristic is a
polyline with slope ``lambda2(w)`` of the piece it is in.  It crosses
1-fronts transversally, never meets a contact (equal lambda2 on both
sides) and, once it runs into an interaction point, follows the outgoing
contact.  On a contact the right value of z is used.

All characteristics of a mesh are advanced together in one sweep over the
recorded interactions, as passive items of the ordered front list.
"""

from __future__ import annotations

import bisect
import heapq
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

from .engine import Trajectory, _same_time
from .riemann import Front, FrontKind, LState

__all__ = [
    "Crossing",
    "CharPath",
    "LagrangianField",
    "trace_2char",
    "trace_many",
    "z_along",
    "cubic_budget",
    "lagrangian",
    "default_mesh",
]

log = logging.getLogger(__name__)

_HEAD, _TAIL = -1, -2
# absolute/relative distance under which a characteristic sits on an interaction point
_X_TOL = 1e-9


@dataclass
class Crossing:
    time: float
    front_id: int
    dz: float
    dlambda2: float
    cube: float  # sum of |sigma|^3 of the 1-shocks passed
    absorbed: bool = False


@dataclass
class CharPath:
    x0: float
    z0: float
    w0_k: int
    vertices: list[tuple[float, float]] = field(default_factory=list)
    crossings: list[Crossing] = field(default_factory=list)
    absorbed_into_cd: int | None = None
    absorptions: int = 0
    v_exact: float = 1.0  # product of exact stretching factors at crossings
    degenerate: bool = False  # rode a contact, so no local stretching factor

    def position(self, t: float) -> float:
        vs = self.vertices
        i = bisect.bisect_right([v[0] for v in vs], t) - 1
        i = min(max(i, 0), len(vs) - 2)
        (t0, x0), (t1, x1) = vs[i], vs[i + 1]
        if t1 == t0:
            return x1
        return x0 + (x1 - x0) * (t - t0) / (t1 - t0)

    @property
    def v_teles(self) -> float:
        """``exp`` of the telescoping sum of lambda2 jumps along the path."""
        return math.exp(sum(c.dlambda2 for c in self.crossings))


@dataclass
class _Char:
    j: int
    path: CharPath
    state: LState
    t0: float
    x0: float
    speed: float
    rider_of: int | None = None
    version: int = 0

    def x(self, t: float) -> float:
        return self.x0 + self.speed * (t - self.t0)


def _cid(j: int) -> int:
    return -(j + 3)


def _is_char(item: int) -> bool:
    return item <= -3


def _add_vertex(path: CharPath, t: float, x: float) -> None:
    # keep vertex times strictly increasing
    if path.vertices and path.vertices[-1][0] >= t:
        path.vertices[-1] = (path.vertices[-1][0], x)
    else:
        path.vertices.append((t, x))


def _cube(f: Front, nu: int) -> float:
    return abs(f.w_strength / nu) ** 3 if f.kind is FrontKind.SHOCK1 else 0.0


def _start_piece(traj: Trajectory, x0: float) -> int:
    """Index into initial_order after which a characteristic launched at x0 sits."""
    fr = traj.fronts
    order = traj.initial_order
    pos = [fr[i].position for i in order]
    return bisect.bisect_right(pos, x0)


def trace_many(traj: Trajectory, xs: Sequence[float], t_end: float | None = None) -> list[CharPath]:
    """Trace characteristics from every start point in ``xs`` up to ``t_end``."""
    m, nu, fr = traj.model, traj.nu, traj.fronts
    t_end = traj.t_max if t_end is None else t_end
    lam2 = lambda k: m.lambda2(k / nu)

    nxt: dict[int, int] = {}
    prv: dict[int, int] = {}

    def link(ids):
        for a, b in zip(ids, ids[1:]):
            nxt[a] = b
            prv[b] = a

    def unlink(i):
        p, n = prv.pop(i), nxt.pop(i)
        nxt[p] = n
        prv[n] = p

    def insert_after(i, new):
        n = nxt[i]
        link([i, new, n])

    order = traj.initial_order
    xs_sorted = sorted(range(len(xs)), key=lambda j: xs[j])
    slots: dict[int, list[int]] = {}
    for j in xs_sorted:
        slots.setdefault(_start_piece(traj, xs[j]), []).append(j)
    seq: list[int] = [_HEAD]
    for idx in range(len(order) + 1):
        seq.extend(_cid(j) for j in slots.get(idx, []))
        if idx < len(order):
            seq.append(order[idx])
    seq.append(_TAIL)
    link(seq)

    states0 = traj.initial.states
    by_j: dict[int, _Char] = {}
    for j in range(len(xs)):
        st = states0[_piece_index(traj, xs[j])]
        path = CharPath(float(xs[j]), st.z, st.k, vertices=[(0.0, float(xs[j]))])
        ch = _Char(j, path, st, 0.0, float(xs[j]), lam2(st.k))
        by_j[j] = ch
    chars = [by_j[j] for j in range(len(xs))]
    riders: dict[int, list[_Char]] = {}

    heap: list = []
    tick = itertools.count()

    def schedule(item: int, t_now: float) -> None:
        if not _is_char(item):
            return
        ch = by_j[-item - 3]
        f_id = nxt[item]
        if f_id < 0:
            return
        f = fr[f_id]
        if not f.kind.is_one_wave or not ch.speed > f.speed:
            return
        gap = max(f.x(t_now) - ch.x(t_now), 0.0)
        t_hit = t_now + gap / (ch.speed - f.speed)
        heapq.heappush(heap, (t_hit, next(tick), ch.j, f_id, ch.version))

    def valid(entry) -> bool:
        _, _, j, f_id, ver = entry
        ch = by_j[j]
        return ch.rider_of is None and ch.version == ver and nxt.get(_cid(j)) == f_id

    for item in seq:
        schedule(item, 0.0)

    def cross(ch: _Char, f: Front, t: float) -> None:
        x = f.x(t)
        new = f.right
        l_old, l_new = lam2(ch.state.k), lam2(new.k)
        ch.path.crossings.append(
            Crossing(t, f.id, new.z - ch.state.z, l_new - l_old, _cube(f, nu))
        )
        ch.path.v_exact *= (l_new - f.speed) / (l_old - f.speed)
        _add_vertex(ch.path, t, x)
        ch.state, ch.t0, ch.x0, ch.speed = new, t, x, l_new
        ch.version += 1

    events = traj.events
    ei = 0
    while True:
        while heap and not valid(heap[0]):
            heapq.heappop(heap)
        t_cross = heap[0][0] if heap else math.inf
        t_int = events[ei].time if ei < len(events) else math.inf
        if min(t_cross, t_int) > t_end:
            break
        if t_cross < t_int and not _same_time(t_cross, t_int):
            t, _, j, f_id, _ = heapq.heappop(heap)
            ch = by_j[j]
            c = _cid(j)
            before = prv[c]
            cross(ch, fr[f_id], t)
            unlink(c)
            insert_after(f_id, c)
            schedule(c, t)
            schedule(before, t)
            continue

        e = events[ei]
        ei += 1
        t, xe = e.time, e.position
        a, b = fr[e.left_id], fr[e.right_id]
        tol = _X_TOL * max(1.0, abs(xe))

        def close(item):
            return _is_char(item) and abs(by_j[-item - 3].x(t) - xe) <= tol

        absorbed: list[tuple[_Char, list[Front]]] = []
        if a.kind.is_one_wave:
            left_run = []
            i = prv[a.id]
            while close(i):
                left_run.append(i)
                i = prv[i]
            absorbed += [(by_j[-i - 3], [a, b]) for i in reversed(left_run)]
        i = nxt[a.id]
        while i != b.id:
            absorbed.append((by_j[-i - 3], [b]))
            i = nxt[i]
        i = nxt[b.id]
        while close(i):
            absorbed.append((by_j[-i - 3], []))
            i = nxt[i]
        for ch, _ in absorbed:
            unlink(_cid(ch.j))
        p, n = prv[a.id], nxt[b.id]
        unlink(a.id)
        unlink(b.id)
        link([p, *e.outgoing_ids, n])

        cd = e.outgoing[-1] if e.outgoing and e.outgoing[-1].kind is FrontKind.CONTACT2 else None
        moving = [(ch, passed, True) for ch, passed in absorbed]
        moving += [(ch, [b], False) for ch in riders.pop(a.id, [])]
        freed = []
        for ch, passed, fresh in moving:
            old = ch.state
            new = e.u_plus
            ch.path.crossings.append(
                Crossing(
                    t, b.id, new.z - old.z, lam2(new.k) - lam2(old.k),
                    sum(_cube(f, nu) for f in passed), absorbed=fresh,
                )
            )
            _add_vertex(ch.path, t, xe)
            ch.path.degenerate = True
            ch.state, ch.t0, ch.x0 = new, t, xe
            ch.version += 1
            if fresh:
                ch.path.absorptions += 1
            if cd is not None:
                ch.rider_of = cd.id
                ch.path.absorbed_into_cd = cd.id
                ch.speed = cd.speed
                riders.setdefault(cd.id, []).append(ch)
            else:
                ch.rider_of = None
                ch.speed = lam2(new.k)
                freed.append(ch)
        last = e.outgoing_ids[-1] if e.outgoing else p
        for ch in reversed(freed):
            insert_after(last, _cid(ch.j))
        for ch in freed:
            schedule(_cid(ch.j), t)
        schedule(p, t)

    for ch in chars:
        if ch.rider_of is not None:
            f = fr[ch.rider_of]
            _add_vertex(ch.path, t_end, f.x(t_end))
        else:
            _add_vertex(ch.path, t_end, ch.x(t_end))
    return [ch.path for ch in chars]


def _piece_index(traj: Trajectory, x0: float) -> int:
    """Initial lattice piece containing ``x0``; a breakpoint belongs to the right piece."""
    return bisect.bisect_right(list(traj.initial.breakpoints), x0)


def trace_2char(traj: Trajectory, x0: float, t_end: float | None = None) -> CharPath:
    return trace_many(traj, [x0], t_end)[0]


def z_along(path: CharPath) -> list[tuple[float, float]]:
    """z on the path after each crossing, starting with ``(0, z0)``."""
    out = [(0.0, path.z0)]
    z = path.z0
    for c in path.crossings:
        z += c.dz
        out.append((c.time, z))
    return out


def cubic_budget(path: CharPath) -> float:
    return sum(c.cube for c in path.crossings)


def default_mesh(traj: Trajectory, count: int = 256) -> list[float]:
    """Uniform launch points over the data support widened by one support width.

    Points landing on an initial breakpoint are moved one ulp to the right.
    """
    bps = traj.initial.breakpoints
    if bps:
        a, b = bps[0], bps[-1]
    else:
        a, b = 0.0, 1.0
    width = max(b - a, 1.0)
    lo, hi = a - width, b + width
    step = (hi - lo) / count
    mesh = [lo + (i + 0.5) * step for i in range(count)]
    bset = set(bps)
    out = []
    for x in mesh:
        if x in bset:
            log.warning("mesh point %r on a breakpoint, shifted by one ulp", x)
            x = math.nextafter(x, math.inf)
        out.append(x)
    return out


@dataclass
class LagrangianField:
    mesh: list[float]
    paths: list[CharPath]
    t_end: float

    def eta(self, i: int, t: float) -> float:
        """``z(t, gamma2(t, x_i)) - z_{0,nu}(x_i)``."""
        p = self.paths[i]
        return sum(c.dz for c in p.crossings if c.time <= t)

    def v(self, i: int, t: float | None = None) -> float:
        p = self.paths[i]
        cs = p.crossings if t is None else [c for c in p.crossings if c.time <= t]
        return math.exp(sum(c.dlambda2 for c in cs))

    def gamma(self, i: int, t: float) -> float:
        return self.paths[i].position(t)


def lagrangian(traj: Trajectory, mesh: Sequence[float] | None = None, t_end: float | None = None) -> LagrangianField:
    mesh = list(default_mesh(traj) if mesh is None else mesh)
    bset = set(traj.initial.breakpoints)
    for i, x in enumerate(mesh):
        if x in bset:
            log.warning("mesh point %r on a breakpoint, shifted by one ulp", x)
            mesh[i] = math.nextafter(x, math.inf)
    t_end = traj.t_max if t_end is None else t_end
    return LagrangianField(mesh, trace_many(traj, mesh, t_end), t_end)
