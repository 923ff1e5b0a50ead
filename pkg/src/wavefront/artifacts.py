"""Artifact files: event log, snapshots, characteristics and the JSON report.

The event log is complete: its header holds the model, the lattice data and
the initial fronts, and every interaction line carries its outgoing fronts,
so a ``Trajectory`` can be rebuilt bit for bit from it.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .characteristics import CharPath
from .engine import CaseTag, InteractionRecord, Snapshot, Trajectory
from .errors import ContractError
from .model import ModelSpec
from .riemann import Front, FrontKind, LatticeFunction, LState

__all__ = [
    "front_to_dict",
    "front_from_dict",
    "write_events",
    "events_text",
    "read_events",
    "snapshots_text",
    "chars_text",
    "write_json",
]

FORMAT = "wavefront-events/1"


def _st(s: LState) -> list:
    return [s.k, s.z]


def _ls(v) -> LState:
    k, z = v
    if type(k) is not int:
        raise ContractError(f"lattice index {k!r} is not an integer")
    return LState(k, float(z))


def front_to_dict(f: Front) -> dict:
    return {
        "id": f.id,
        "kind": f.kind.value,
        "x": f.position,
        "t": f.birth_time,
        "speed": f.speed,
        "left": _st(f.left),
        "right": _st(f.right),
    }


def front_from_dict(d: dict) -> Front:
    return Front(
        d["id"], FrontKind(d["kind"]), float(d["x"]), float(d["t"]), float(d["speed"]),
        _ls(d["left"]), _ls(d["right"]),
    )


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def events_text(traj: Trajectory, meta: dict) -> str:
    head = {
        "type": "header",
        "format": FORMAT,
        "version": __version__,
        "meta": meta,
        "model": traj.model.params(),
        "nu": traj.nu,
        "t_max": traj.t_max,
        "initial": traj.initial.to_dict(),
        "fronts": [front_to_dict(traj.fronts[i]) for i in traj.initial_order],
    }
    lines = [_dumps(head)]
    for e in traj.events:
        lines.append(_dumps({
            "type": "event",
            "index": e.index,
            "time": e.time,
            "x": e.position,
            "left": e.left_id,
            "right": e.right_id,
            "case": e.case.value,
            "u_minus": _st(e.u_minus),
            "u_zero": _st(e.u_zero),
            "u_plus": _st(e.u_plus),
            "u_m": _st(e.u_m),
            "n1_after": e.n1_after,
            "outgoing": [front_to_dict(f) for f in e.outgoing],
        }))
    lines.append(_dumps({"type": "end", "events": len(traj.events), "quiescent": traj.quiescent}))
    return "\n".join(lines) + "\n"


def write_events(path: str | Path, traj: Trajectory, meta: dict) -> None:
    Path(path).write_text(events_text(traj, meta))


def read_events(path: str | Path) -> tuple[Trajectory, dict]:
    """Rebuild a trajectory from an event log; returns it with the header meta."""
    traj = None
    meta: dict = {}
    with open(path) as fh:
        for n, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ContractError(f"{path}:{n}: {exc}") from None
            kind = rec.get("type")
            if kind == "header":
                if rec.get("format") != FORMAT:
                    raise ContractError(f"{path}: unknown format {rec.get('format')!r}")
                meta = rec.get("meta", {})
                lf = LatticeFunction.from_dict(rec["initial"])
                traj = Trajectory(ModelSpec(**rec["model"]), rec["nu"], lf, float(rec["t_max"]))
                for d in rec["fronts"]:
                    f = front_from_dict(d)
                    traj.fronts[f.id] = f
                    traj.initial_order.append(f.id)
            elif traj is None:
                raise ContractError(f"{path}:{n}: event before header")
            elif kind == "event":
                out = [front_from_dict(d) for d in rec["outgoing"]]
                for f in out:
                    traj.fronts[f.id] = f
                t = float(rec["time"])
                traj.fronts[rec["left"]].death_time = t
                traj.fronts[rec["right"]].death_time = t
                traj.events.append(InteractionRecord(
                    rec["index"], t, float(rec["x"]), rec["left"], rec["right"], CaseTag(rec["case"]),
                    _ls(rec["u_minus"]), _ls(rec["u_zero"]), _ls(rec["u_plus"]), _ls(rec["u_m"]),
                    out, rec["n1_after"],
                ))
            elif kind == "end":
                traj.quiescent = bool(rec["quiescent"])
    if traj is None:
        raise ContractError(f"{path}: no header line")
    return traj, meta


def _header_lines(meta: dict) -> list[str]:
    return [f"# version={__version__} config_hash={meta.get('config_hash', '')}"]


def snapshots_text(snaps: Iterable[Snapshot], meta: dict) -> str:
    """One row per constant piece: ``x`` is its left end (``-inf`` for the first)."""
    buf = io.StringIO()
    buf.write("\n".join(_header_lines(meta)) + "\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["t", "x", "w_int", "w", "z"])
    for s in snaps:
        xs, st = s.compact()
        lefts = [-math.inf] + xs
        for x, q in zip(lefts, st):
            wr.writerow([repr(s.t), "-inf" if x == -math.inf else repr(x), q.k, repr(q.k / s.nu), repr(q.z)])
    return buf.getvalue()


def chars_text(paths: Sequence[CharPath], meta: dict) -> str:
    """Polyline vertices of every path with z and the cubic budget used so far."""
    buf = io.StringIO()
    buf.write("\n".join(_header_lines(meta)) + "\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["x0", "t", "x", "z", "cumulative_budget"])
    for p in paths:
        cs = p.crossings
        i, z, budget = 0, p.z0, 0.0
        for t, x in p.vertices:
            while i < len(cs) and cs[i].time <= t:
                z += cs[i].dz
                budget += cs[i].cube
                i += 1
            wr.writerow([repr(p.x0), repr(t), repr(x), repr(z), repr(budget)])
    return buf.getvalue()


def _clean(obj):
    """Replace non-finite floats by strings so the JSON stays standard."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n")
