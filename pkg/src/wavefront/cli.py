"""Command line entry point: run, sweep, verify, variation."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .artifacts import _clean, chars_text, events_text, read_events, snapshots_text, write_json
from .characteristics import default_mesh, lagrangian
from .config import RunConfig, config_hash, tomllib, validate
from .engine import run
from .errors import ConfigError, ContractError, ModelAdmissibilityError, WavefrontError
from .generators import samples_for
from .model import ModelSpec, validate_model
from .riemann import discretize_initial
from .variation import bvs_norm, bvs_seminorm, tvs_exact
from .verify import ball_margin, convergence_study, verify_trajectory

__all__ = ["main", "orchestrate", "sweep", "reverify"]

log = logging.getLogger("wavefront")

EXIT_OK, EXIT_CHECKS, EXIT_CONFIG, EXIT_STAGE = 0, 1, 2, 3


def _meta(cfg: RunConfig) -> dict:
    return {"config_hash": config_hash(cfg), "config": cfg.canonical(), "version": __version__}


def _snapshot_times(cfg: RunConfig, traj) -> list[float]:
    times = sorted(cfg.snapshot_times) if cfg.snapshot_times else [0.0, cfg.t_max]
    ev = {e.time for e in traj.events}
    out = []
    for t in times:
        if t in ev and t < cfg.t_max:
            log.warning("snapshot time %r is an event time, read one ulp later", t)
            t = math.nextafter(t, math.inf)
        out.append(t)
    return out


def _counters(traj) -> dict:
    return {
        "events": len(traj.events),
        "n_one_one": traj.n_one_one,
        "n_one_two": traj.n_one_two,
        "fronts_created": len(traj.fronts),
        "quiescent": traj.quiescent,
        "last_event_time": traj.events[-1].time if traj.events else None,
    }


def orchestrate(cfg: RunConfig, out_dir: str | Path | None = None) -> int:
    """discretize -> run -> characteristics -> verify -> write artifacts.

    Returns 0 when every gated check passes, 1 otherwise and 3 when a stage
    fails; partial artifacts are still written in that case.
    """
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = _meta(cfg)
    report: dict = {"meta": meta}
    traj = None
    stage = "model"
    try:
        m = ModelSpec(cfg.b, cfg.kappa, cfg.r)
        vr = validate_model(m)
        report["model_validation"] = {"passed": vr.passed, "failures": vr.failures}
        if not vr.passed:
            raise ModelAdmissibilityError("; ".join(vr.failures))

        stage = "discretize"
        x, w, z = samples_for(cfg, m)
        lf, drep = discretize_initial(x, w, z, cfg.nu, cfg.s_list)
        report["discretization"] = drep.to_dict()

        stage = "run"
        traj = run(m, lf, cfg.t_max)
        report["counters"] = _counters(traj)
        report["ball_margin"] = ball_margin(traj)

        stage = "snapshots"
        times = _snapshot_times(cfg, traj)
        snaps = list(traj.snapshots(times))

        stage = "characteristics"
        field = lagrangian(traj, default_mesh(traj, cfg.mesh_count))

        stage = "verify"
        checks = verify_trajectory(traj, cfg.s_list, times, field)
        report["checks"] = checks.to_dict()
        report["passed"] = checks.passed

        stage = "write"
        (out / "events.jsonl").write_text(events_text(traj, meta))
        (out / "snapshots.csv").write_text(snapshots_text(snaps, meta))
        (out / "chars.csv").write_text(chars_text(field.paths, meta))
        write_json(out / "report.json", report)
    except (WavefrontError, ValueError, OSError) as exc:
        traj = getattr(exc, "trajectory", traj)
        report["error"] = {"stage": stage, "type": type(exc).__name__, "message": str(exc)}
        report["passed"] = False
        if traj is not None:
            report.setdefault("counters", _counters(traj))
            try:
                (out / "events.jsonl").write_text(events_text(traj, meta))
            except (ValueError, OSError):
                pass
        write_json(out / "report.json", report)
        log.error("[%s] %s: %s", stage, type(exc).__name__, exc)
        return EXIT_STAGE
    _print_checks(report["checks"])
    return checks.exit_code


def _print_checks(checks: dict, stream=None) -> None:
    stream = stream or sys.stdout
    for name, c in checks.items():
        print(f"{c['verdict'].upper():4s}  {name}  measured={json.dumps(c['measured'])}", file=stream)


def sweep(cfg: RunConfig, nu_list: Sequence[int] | None = None, out_dir: str | Path | None = None) -> int:
    """Convergence table over ``nu_list``; descriptive, the exit code is 0."""
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    m = ModelSpec(cfg.b, cfg.kappa, cfg.r)
    x, w, z = samples_for(cfg, m)
    times = [t for t in cfg.snapshot_times if t > 0] or [cfg.t_max]
    rep = convergence_study(m, x, w, z, nu_list or cfg.nu_list, times, cfg.t_max)
    meta = _meta(cfg)
    buf = io.StringIO()
    buf.write(f"# version={__version__} config_hash={meta['config_hash']}\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["nu_a", "nu_b", "t", "l1_w", "l1_z"])
    for r in rep.rows:
        wr.writerow([r["nu_a"], r["nu_b"], repr(r["t"]), repr(r["l1_w"]), repr(r["l1_z"])])
    (out / "convergence.csv").write_text(buf.getvalue())
    write_json(out / "convergence.json", {"meta": meta, **rep.to_dict()})
    sys.stdout.write(buf.getvalue())
    for f in rep.trend_flags:
        print(f"NOTE  {f}")
    return EXIT_OK


def reverify(run_dir: str | Path) -> int:
    """Re-run every check from a saved event log and compare with the saved report."""
    run_dir = Path(run_dir)
    traj, meta = read_events(run_dir / "events.jsonl")
    c = meta.get("config", {})
    s_list = c.get("s_list", [1 / 3, 1 / 2, 1.0])
    mesh_count = c.get("mesh_count", 256)
    times = c.get("snapshot_times") or [0.0, traj.t_max]
    ev = {e.time for e in traj.events}
    times = [math.nextafter(t, math.inf) if t in ev and t < traj.t_max else t for t in sorted(times)]
    checks = verify_trajectory(traj, s_list, times, mesh_count=mesh_count)
    fresh = json.loads(json.dumps(_clean(checks.to_dict()), sort_keys=True))
    _print_checks(fresh)
    saved_path = run_dir / "report.json"
    if saved_path.exists():
        saved = json.loads(saved_path.read_text()).get("checks")
        if saved is not None and saved != fresh:
            print("MISMATCH  saved report differs from re-verification")
            return EXIT_CHECKS
    return checks.exit_code


def _read_column(path: str, column: str | None) -> list[float]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#")) if r]
    if not rows:
        raise ContractError(f"{path}: empty file")
    try:
        float(rows[0][0])
        header = None
    except ValueError:
        header, rows = rows[0], rows[1:]
    idx = 0
    if column is not None:
        if header is None or column not in header:
            raise ContractError(f"{path}: no column named {column!r}")
        idx = header.index(column)
    try:
        return [float(r[idx]) for r in rows]
    except (ValueError, IndexError) as exc:
        raise ContractError(f"{path}: {exc}") from None


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _build_config(args) -> RunConfig:
    raw: dict = {}
    base = None
    if args.config:
        base = Path(args.config)
        try:
            raw = tomllib.loads(base.read_text())
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError([f"parse error: {exc}"]) from None
    for key in ("nu", "t_max", "initial", "b", "kappa", "r", "seed", "count", "amplitude",
                "mesh_count", "out_dir", "s_list", "snapshot_times", "nu_list"):
        v = getattr(args, key, None)
        if v is not None:
            raw[key] = v
    cfg = validate(raw)
    if base is not None and not cfg.initial_is_preset and not Path(cfg.initial).is_absolute():
        cfg = cfg.replace(initial=str(base.parent / cfg.initial))
    return cfg


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("config", nargs="?", help="TOML config file; flags override its fields")
    p.add_argument("--nu", type=int)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--initial", help="CSV path or random-steps / two-shock / pure-cd")
    p.add_argument("--b", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--mesh-count", dest="mesh_count", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--s-list", dest="s_list", type=_floats, help="comma separated")
    p.add_argument("--snapshot-times", dest="snapshot_times", type=_floats, help="comma separated")
    p.add_argument("--nu-list", dest="nu_list", type=_ints, help="comma separated (sweep)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wavefront", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)
    _add_run_flags(sub.add_parser("run", help="track fronts, trace characteristics, check, write artifacts"))
    _add_run_flags(sub.add_parser("sweep", help="nu-convergence table"))
    pv = sub.add_parser("verify", help="re-check a saved run directory")
    pv.add_argument("run_dir")
    pt = sub.add_parser("variation", help="TV^s of a CSV sequence")
    pt.add_argument("csv")
    pt.add_argument("--column")
    pt.add_argument("--s", type=_floats, default=[1 / 3, 1 / 2, 1.0], help="comma separated exponents")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.cmd in ("run", "sweep"):
            cfg = _build_config(args)
            return orchestrate(cfg) if args.cmd == "run" else sweep(cfg)
        if args.cmd == "verify":
            return reverify(args.run_dir)
        values = _read_column(args.csv, args.column)
        print("s,tvs,bvs_seminorm,bvs_norm")
        for s in args.s:
            print(f"{s!r},{tvs_exact(values, s)!r},{bvs_seminorm(values, s)!r},{bvs_norm(values, s)!r}")
        return EXIT_OK
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (WavefrontError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
