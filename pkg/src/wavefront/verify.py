"""Invariant and estimate checks on finished trajectories, plus a nu-convergence probe.

Every check reads the trajectory only.  Each returns a ``CheckEntry`` with a
verdict, the measured quantity, the bound it was held to, the tolerance and
the worst location found.
"""

from __future__ import annotations

import bisect
import heapq
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Sequence

from .characteristics import LagrangianField, cubic_budget, lagrangian
from .engine import CaseTag, Replayer, Trajectory, count_bounds, run
from .model import ModelSpec
from .riemann import FrontKind, discretize_initial
from .variation import exponent_p, tvs_lattice_units

__all__ = [
    "CheckEntry",
    "CheckReport",
    "check_tvs_monotone",
    "check_z_linf",
    "check_counts",
    "check_lax_and_grid",
    "check_interaction_algebra",
    "check_characteristics",
    "verify_trajectory",
    "l1_distance",
    "convergence_study",
    "ConvergenceReport",
]

Z_TOL = 1e-10
CD_TOL = 1e-12
TVS_TOL = 1e-12


@dataclass
class CheckEntry:
    name: str
    passed: bool
    measured: Any
    bound: Any
    tolerance: float
    worst_location: dict | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "verdict": "pass" if self.passed else "fail",
            "measured": self.measured,
            "bound": self.bound,
            "tolerance": self.tolerance,
            "worst_location": self.worst_location,
            "details": self.details,
        }


@dataclass
class CheckReport:
    entries: dict[str, CheckEntry] = field(default_factory=dict)

    def add(self, e: CheckEntry) -> None:
        if e.name in self.entries:
            raise ValueError(f"check {e.name} reported twice")
        self.entries[e.name] = e

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries.values())

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def failures(self) -> list[str]:
        return [n for n, e in self.entries.items() if not e.passed]

    def to_dict(self) -> dict:
        return {n: e.to_dict() for n, e in self.entries.items()}


def _compress(ks: Sequence[int]) -> list[int]:
    out: list[int] = []
    for k in ks:
        if not out or out[-1] != k:
            out.append(k)
    return out


def _loc(e) -> dict:
    return {"event": e.index, "time": e.time, "x": e.position, "case": e.case.value}


def check_tvs_monotone(traj: Trajectory, s_list: Sequence[float] = (1 / 3, 1 / 2, 1.0)) -> CheckEntry:
    """TV^s of w never grows across an event and is constant before the first one.

    At 1-1 events the full lattice sequence is re-evaluated (exact integers
    for integer 1/s).  A contact crossing leaves the sequence of w values
    unchanged, which is checked locally.
    """
    nu, fr = traj.nu, traj.fronts
    exact = all(float(exponent_p(s)).is_integer() for s in s_list)
    tol = 0.0 if exact else TVS_TOL
    rep = Replayer(traj)

    def current() -> list[int]:
        return [traj.far_left.k] + [fr[i].right.k for i in rep.order()]

    def units(ks, s):
        return tvs_lattice_units(ks, s)

    prev = {s: units(current(), s) for s in s_list}
    init = {s: units(list(traj.initial.k_values), s) for s in s_list}
    worst_inc, worst = 0.0, None
    ok = True
    for s in s_list:
        if prev[s] != init[s]:
            ok = False
            worst = {"event": None, "time": 0.0, "s": s, "reason": "TV^s at t=0+ differs from the data"}
    for e in traj.events:
        rep.apply(e)
        if e.case.one_one:
            ks = current()
            for s in s_list:
                now = units(ks, s)
                inc = float(now - prev[s]) / nu ** exponent_p(s)
                thr = tol * max(1.0, abs(float(prev[s])) / nu ** exponent_p(s))
                if inc > thr:
                    ok = False
                if inc > worst_inc:
                    worst_inc, worst = inc, {**_loc(e), "s": s}
                prev[s] = now
        else:
            a, b = fr[e.left_id], fr[e.right_id]
            before = _compress([a.left.k, a.right.k, b.right.k])
            after = _compress([e.u_minus.k] + [f.right.k for f in e.outgoing])
            if before != after:
                ok = False
                worst = {**_loc(e), "reason": "contact crossing changed the w sequence"}
    tv0 = {f"{s:.6g}": float(init[s]) / nu ** exponent_p(s) for s in s_list}
    tv_end = {f"{s:.6g}": float(prev[s]) / nu ** exponent_p(s) for s in s_list}
    return CheckEntry(
        "tvs_monotone", ok, worst_inc, 0.0, tol, worst,
        {"tvs_initial": tv0, "tvs_final": tv_end, "exact_integer_arithmetic": exact},
    )


class _SupTracker:
    """Multiset of |z| values with a lazily cleaned max-heap."""

    def __init__(self, values):
        self.count = Counter(abs(v) for v in values)
        self.heap = [-v for v in self.count]
        heapq.heapify(self.heap)

    def add(self, v: float) -> None:
        a = abs(v)
        if self.count[a] == 0:
            heapq.heappush(self.heap, -a)
        self.count[a] += 1

    def remove(self, v: float) -> None:
        self.count[abs(v)] -= 1

    def max(self) -> float:
        while self.count[-self.heap[0]] <= 0:
            heapq.heappop(self.heap)
        return -self.heap[0]


def z_budget(traj: Trajectory) -> float:
    """``||z_0||_inf + kappa (TV^{1/3}(w_0) + 8 nu^-3 * events)``."""
    lf, nu = traj.initial, traj.nu
    tv3 = tvs_lattice_units(list(lf.k_values), 1 / 3) / nu**3
    z0 = max(abs(z) for z in lf.z_values)
    return z0 + traj.model.kappa * (tv3 + 8.0 * len(traj.events) / nu**3)


def check_z_linf(traj: Trajectory) -> CheckEntry:
    """sup|z(t)| against the cubic budget at every event, and where it grows."""
    fr = traj.fronts
    tr = _SupTracker([traj.far_left.z] + [fr[i].right.z for i in traj.initial_order])
    z0 = tr.max()
    bound = z_budget(traj)
    sup = z0
    worst = None
    bad_growth = []
    for e in traj.events:
        before = tr.max()
        tr.remove(fr[e.left_id].right.z)
        tr.remove(fr[e.right_id].right.z)
        for f in e.outgoing:
            tr.add(f.right.z)
        after = tr.max()
        if after > before and e.case not in (CaseTag.CD_S1, CaseTag.S1_S1):
            bad_growth.append(_loc(e))
        if after > sup:
            sup, worst = after, _loc(e)
    ok = sup <= bound + Z_TOL and not bad_growth
    if bad_growth:
        worst = bad_growth[0]
    return CheckEntry(
        "z_linf_budget", ok, sup, bound, Z_TOL, worst,
        {"z0_sup": z0, "growth_outside_shock_cases": len(bad_growth)},
    )


def check_counts(traj: Trajectory) -> CheckEntry:
    b1, b2 = count_bounds(traj.initial)
    n1 = traj.n1_initial
    worst = None
    ok = True
    for e in traj.events:
        if e.case.one_one and e.n1_after > n1:
            ok = False
            worst = {**_loc(e), "n1_before": n1, "n1_after": e.n1_after}
        n1 = e.n1_after
    c1, c2 = traj.n_one_one, traj.n_one_two
    ok = ok and c1 <= b1 and c2 <= b2
    if worst is None and not ok:
        worst = {"n_one_one": c1, "n_one_two": c2}
    return CheckEntry(
        "counts", ok, {"n_one_one": c1, "n_one_two": c2}, {"n_one_one": b1, "n_one_two": b2}, 0.0, worst,
        {
            "quiescent": traj.quiescent,
            "N_nu": traj.initial.n_breakpoints,
            "osc": traj.initial.oscillation,
            "slack_one_one": b1 - c1,
            "slack_one_two": b2 - c2,
        },
    )


def check_lax_and_grid(traj: Trajectory, snapshot_times: Sequence[float] = ()) -> CheckEntry:
    """Shock speeds strictly inside the Lax window, lattice w values, sound contacts."""
    m, nu = traj.model, traj.nu
    problems: list[dict] = []
    worst_cd = 0.0
    for f in traj.fronts.values():
        loc = {"front": f.id, "time": f.birth_time, "x": f.position, "kind": f.kind.value}
        for st in (f.left, f.right):
            if type(st.k) is not int:
                problems.append({**loc, "reason": f"w index {st.k!r} is not an integer"})
        if f.kind is FrontKind.SHOCK1:
            lr = m._lambda1(f.right.k / nu, f.right.z)
            ll = m._lambda1(f.left.k / nu, f.left.z)
            if not (lr < f.speed < ll):
                problems.append({**loc, "reason": f"Lax: {lr!r} < {f.speed!r} < {ll!r} fails"})
        elif f.kind is FrontKind.CONTACT2:
            d = abs(m._lambda2(f.left.k / nu) - m._lambda2(f.right.k / nu))
            worst_cd = max(worst_cd, d)
            if d > CD_TOL or f.left.k != f.right.k:
                problems.append({**loc, "reason": f"lambda2 jump {d!r} across contact"})
            if abs(f.speed - m._lambda2(f.right.k / nu)) > CD_TOL:
                problems.append({**loc, "reason": f"contact speed {f.speed!r} differs from lambda2"})
        else:
            if f.w_strength != 1 or f.left.z != f.right.z:
                problems.append({**loc, "reason": "rarefaction front is not one lattice step at constant z"})
    for snap in traj.snapshots(sorted(snapshot_times)):
        for k in snap.k_values:
            if type(k) is not int:
                problems.append({"time": snap.t, "reason": f"snapshot w index {k!r} not an integer"})
                break
    ok = not problems
    return CheckEntry(
        "lax_and_grid", ok, {"violations": len(problems), "max_cd_lambda2_jump": worst_cd},
        {"violations": 0, "max_cd_lambda2_jump": CD_TOL}, CD_TOL,
        problems[0] if problems else None,
    )


def check_interaction_algebra(traj: Trajectory) -> CheckEntry:
    """Strength bookkeeping and fan shape of every recorded interaction."""
    fr = traj.fronts
    problems: list[dict] = []
    for e in traj.events:
        a, b = fr[e.left_id], fr[e.right_id]
        out = e.outgoing
        ones = [f for f in out if f.kind.is_one_wave]
        cds = [f for f in out if not f.kind.is_one_wave]
        s_out = sum(f.w_strength for f in ones)
        if e.case.one_one:
            if s_out != a.w_strength + b.w_strength:
                problems.append({**_loc(e), "reason": f"1-1 strength {s_out} != {a.w_strength}+{b.w_strength}"})
        elif s_out != b.w_strength:
            problems.append({**_loc(e), "reason": f"1-wave strength {b.w_strength} -> {s_out} across contact"})
        kinds = [f.kind for f in out]
        shape_ok = (
            len(cds) <= 1
            and (not cds or kinds[-1] is FrontKind.CONTACT2)
            and (len({f.kind for f in ones}) <= 1)
            and sum(f.kind is FrontKind.SHOCK1 for f in ones) <= 1
        )
        chain = [e.u_minus] + [f.right for f in out]
        linked = all(f.left == s for f, s in zip(out, chain)) and chain[-1] == e.u_plus
        if not shape_ok:
            problems.append({**_loc(e), "reason": "outgoing fan is not 1-waves then one contact"})
        if not linked:
            problems.append({**_loc(e), "reason": "outgoing fan does not connect u_minus to u_plus"})
        if a.left != e.u_minus or a.right != e.u_zero or b.left != e.u_zero or b.right != e.u_plus:
            problems.append({**_loc(e), "reason": "incoming states inconsistent with the record"})
    return CheckEntry(
        "interaction_algebra", not problems, {"violations": len(problems), "events": len(traj.events)},
        {"violations": 0}, 0.0, problems[0] if problems else None,
    )


def check_characteristics(traj: Trajectory, lf: LagrangianField | None = None, mesh_count: int = 256) -> CheckEntry:
    """Sign, absorption, stretching and ordering properties along 2-characteristics."""
    from .characteristics import default_mesh

    if lf is None:
        lf = lagrangian(traj, default_mesh(traj, mesh_count))
    nu, m = traj.nu, traj.model
    k_all = {s.k for f in traj.fronts.values() for s in (f.left, f.right)} | set(traj.initial.k_values)
    M = max(abs(m._lambda2(k / nu)) for k in k_all)
    tv3 = tvs_lattice_units(list(traj.initial.k_values), 1 / 3) / nu**3
    eta_bound = m.kappa * (tv3 + 8.0 * len(traj.events) / nu**3)
    z0f = traj.initial.z_function()
    bps = list(traj.initial.breakpoints)

    problems: list[dict] = []
    min_dz, max_abs, max_eta, max_budget_excess = 0.0, 0, 0.0, -math.inf
    v_lo, v_hi = math.inf, -math.inf
    for i, p in enumerate(lf.paths):
        loc = {"mesh_index": i, "x0": p.x0}
        z0 = z0f.values[bisect.bisect_right(bps, p.x0)]
        if p.z0 != z0:
            problems.append({**loc, "reason": "path starts off the initial z"})
        if any(c.time <= 0.0 for c in p.crossings):
            problems.append({**loc, "reason": "eta(0, x) != 0"})
        for c in p.crossings:
            if c.dz < min_dz:
                min_dz = c.dz
            if c.dz < -Z_TOL:
                problems.append({**loc, "time": c.time, "reason": f"z decreases by {c.dz!r}"})
        max_abs = max(max_abs, p.absorptions)
        if p.absorptions > 1:
            problems.append({**loc, "reason": f"{p.absorptions} absorptions"})
        eta = sum(c.dz for c in p.crossings)
        max_eta = max(max_eta, abs(eta))
        if abs(eta) > eta_bound + Z_TOL:
            problems.append({**loc, "reason": f"|eta| = {eta!r} exceeds {eta_bound!r}"})
        excess = cubic_budget(p) - (tv3 + 8.0 * p.absorptions / nu**3)
        max_budget_excess = max(max_budget_excess, excess)
        if excess > Z_TOL:
            problems.append({**loc, "reason": f"cubic budget exceeded by {excess!r}"})
        v = p.v_teles
        v_lo, v_hi = min(v_lo, v), max(v_hi, v)
        if not (math.exp(-2 * M) - Z_TOL <= v <= math.exp(2 * M) + Z_TOL):
            problems.append({**loc, "reason": f"v = {v!r} outside exp(+-2M)"})

    order_bad = 0
    for i, (a, b) in enumerate(zip(lf.paths, lf.paths[1:])):
        if b.x0 < a.x0:
            continue
        ts = sorted({t for t, _ in a.vertices} | {t for t, _ in b.vertices})
        for t in ts:
            if b.position(t) < a.position(t) - Z_TOL:
                order_bad += 1
                problems.append({"mesh_index": i, "time": t, "reason": "characteristics cross"})
                break

    # endpoint cross-check against an independent replay of the solution
    snap = traj.snapshot(lf.t_end)
    end_bad = 0
    for i, p in enumerate(lf.paths):
        x = p.vertices[-1][1]
        j = bisect.bisect_right(snap.positions, x)
        z_sol = snap.states[j].z
        z_path = p.z0 + sum(c.dz for c in p.crossings)
        if abs(z_sol - z_path) > Z_TOL:
            end_bad += 1
            problems.append({"mesh_index": i, "x": x, "reason": f"z on path {z_path!r} vs solution {z_sol!r}"})

    measured = {
        "min_dz": min_dz,
        "max_absorptions": max_abs,
        "v_min": v_lo,
        "v_max": v_hi,
        "max_abs_eta": max_eta,
        "max_budget_excess": max_budget_excess,
        "order_violations": order_bad,
        "endpoint_mismatches": end_bad,
    }
    bound = {
        "min_dz": -Z_TOL,
        "max_absorptions": 1,
        "v_min": math.exp(-2 * M),
        "v_max": math.exp(2 * M),
        "max_abs_eta": eta_bound,
        "max_budget_excess": 0.0,
    }
    return CheckEntry(
        "characteristics", not problems, measured, bound, Z_TOL, problems[0] if problems else None,
        {"mesh_count": len(lf.paths), "M": M, "violations": len(problems)},
    )


def verify_trajectory(
    traj: Trajectory,
    s_list: Sequence[float] = (1 / 3, 1 / 2, 1.0),
    snapshot_times: Sequence[float] = (),
    lf: LagrangianField | None = None,
    mesh_count: int = 256,
) -> CheckReport:
    rep = CheckReport()
    rep.add(check_tvs_monotone(traj, s_list))
    rep.add(check_z_linf(traj))
    rep.add(check_counts(traj))
    rep.add(check_lax_and_grid(traj, snapshot_times))
    rep.add(check_interaction_algebra(traj))
    rep.add(check_characteristics(traj, lf, mesh_count))
    return rep


def ball_margin(traj: Trajectory) -> float:
    """Distance of the worst state to the edge of the admissible ball."""
    m, nu = traj.model, traj.nu
    worst = max(
        max(abs(s.k / nu), abs(s.z))
        for f in traj.fronts.values()
        for s in (f.left, f.right)
    ) if traj.fronts else max(max(abs(k) / nu for k in traj.initial.k_values), max(abs(z) for z in traj.initial.z_values))
    return m.r - worst


def l1_distance(
    xa: Sequence[float], va: Sequence[float], xb: Sequence[float], vb: Sequence[float], lo: float, hi: float
) -> float:
    """Exact L1 distance on ``[lo, hi]`` of two right-continuous step functions.

    ``va`` has one more entry than ``xa`` (value left of the first breakpoint first).
    """
    cuts = sorted({lo, hi, *[x for x in xa if lo < x < hi], *[x for x in xb if lo < x < hi]})
    total = 0.0
    for a, b in zip(cuts, cuts[1:]):
        mid = 0.5 * (a + b)
        fa = va[bisect.bisect_right(xa, mid)]
        fb = vb[bisect.bisect_right(xb, mid)]
        total += (b - a) * abs(fa - fb)
    return total


@dataclass
class ConvergenceReport:
    nu_list: list[int]
    times: list[float]
    rows: list[dict]
    window: tuple[float, float]
    trend_flags: list[str]

    def to_dict(self) -> dict:
        return {
            "nu_list": self.nu_list,
            "times": self.times,
            "window": list(self.window),
            "rows": self.rows,
            "trend_flags": self.trend_flags,
        }


def convergence_study(
    m: ModelSpec,
    x: Sequence[float],
    w: Sequence[float],
    z: Sequence[float],
    nu_list: Sequence[int],
    times: Sequence[float],
    t_max: float,
    window: tuple[float, float] | None = None,
) -> ConvergenceReport:
    """L1 distances of (w, z) snapshots for consecutive nu on the same samples.

    Descriptive only: a non-decreasing distance sequence is flagged, never failed.
    """
    nu_list = list(nu_list)
    if any(b < a for a, b in zip(nu_list, nu_list[1:])):
        raise ValueError("nu_list must be non-decreasing")
    times = sorted(times)
    snaps = {}
    for nu in nu_list:
        lf, _ = discretize_initial(x, w, z, nu)
        traj = run(m, lf, t_max)
        per_t = {}
        for s in traj.snapshots(times):
            xs, st = s.compact()
            per_t[s.t] = (xs, [q.k / nu for q in st], [q.z for q in st])
        snaps[nu] = per_t
    if window is None:
        allx = [p for per_t in snaps.values() for xs, _, _ in per_t.values() for p in xs] or [0.0, 1.0]
        window = (min(allx), max(allx))
    lo, hi = window
    rows = []
    for na, nb in zip(nu_list, nu_list[1:]):
        for t in times:
            xa, wa, za = snaps[na][t]
            xb, wb, zb = snaps[nb][t]
            rows.append({
                "nu_a": na,
                "nu_b": nb,
                "t": t,
                "l1_w": l1_distance(xa, wa, xb, wb, lo, hi),
                "l1_z": l1_distance(xa, za, xb, zb, lo, hi),
            })
    flags = []
    for t in times:
        seq = [r for r in rows if r["t"] == t]
        for key in ("l1_w", "l1_z"):
            vals = [r[key] for r in seq]
            if any(b >= a and a > 0 for a, b in zip(vals, vals[1:])):
                flags.append(f"{key} at t={t:g} not decreasing: {vals}")
    return ConvergenceReport(nu_list, times, rows, (lo, hi), flags)
