"""Run configuration: a flat TOML document of typed fields."""

from __future__ import annotations

import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError

__all__ = ["RunConfig", "parse_config", "load_config", "config_hash", "PRESETS"]

PRESETS = ("random-steps", "two-shock", "pure-cd")


@dataclass(frozen=True)
class RunConfig:
    nu: int
    t_max: float
    initial: str
    b: float = 0.0
    kappa: float = 1.0
    r: float = 0.25
    s_list: tuple[float, ...] = (1 / 3, 1 / 2, 1.0)
    seed: int = 0
    count: int = 20
    amplitude: float = 0.05
    snapshot_times: tuple[float, ...] = ()
    mesh_count: int = 256
    nu_list: tuple[int, ...] = (10, 20, 40, 80)
    out_dir: str = "out"

    @property
    def initial_is_preset(self) -> bool:
        return self.initial in PRESETS

    def canonical(self) -> dict:
        """Fields that determine the artifacts (``out_dir`` excluded)."""
        d = asdict(self)
        d.pop("out_dir")
        d["s_list"] = list(self.s_list)
        d["snapshot_times"] = list(self.snapshot_times)
        d["nu_list"] = list(self.nu_list)
        return d

    def replace(self, **kw) -> "RunConfig":
        d = asdict(self)
        d.update({k: v for k, v in kw.items() if v is not None})
        return validate(d)


_REQUIRED = ("nu", "t_max", "initial")
_INT = {"nu", "seed", "count", "mesh_count"}
_FLOAT = {"t_max", "b", "kappa", "r", "amplitude"}
_FLOAT_LIST = {"s_list", "snapshot_times"}
_INT_LIST = {"nu_list"}
_STR = {"initial", "out_dir"}


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return (isinstance(v, (int, float))) and not isinstance(v, bool)


def validate(raw: dict) -> RunConfig:
    """Type and range checks; every problem is reported with its field name."""
    errs: list[str] = []
    known = {f.name for f in fields(RunConfig)}
    for k in raw:
        if k not in known:
            errs.append(f"{k}: unknown key")
    for k in _REQUIRED:
        if k not in raw:
            errs.append(f"{k}: missing required field")
    vals: dict = {}
    for k, v in raw.items():
        if k not in known:
            continue
        if k in _INT:
            if not _is_int(v):
                errs.append(f"{k}: expected an integer, got {v!r}")
                continue
        elif k in _FLOAT:
            if not _is_num(v):
                errs.append(f"{k}: expected a number, got {v!r}")
                continue
            v = float(v)
            if not math.isfinite(v):
                errs.append(f"{k}: must be finite, got {v!r}")
                continue
        elif k in _FLOAT_LIST:
            if not isinstance(v, (list, tuple)) or not all(_is_num(x) for x in v):
                errs.append(f"{k}: expected a list of numbers, got {v!r}")
                continue
            v = tuple(float(x) for x in v)
            if not all(math.isfinite(x) for x in v):
                errs.append(f"{k}: entries must be finite")
                continue
        elif k in _INT_LIST:
            if not isinstance(v, (list, tuple)) or not all(_is_int(x) for x in v):
                errs.append(f"{k}: expected a list of integers, got {v!r}")
                continue
            v = tuple(v)
        elif k in _STR:
            if not isinstance(v, str):
                errs.append(f"{k}: expected a string, got {v!r}")
                continue
        vals[k] = v

    def rng(name, ok, msg):
        if name in vals and not ok(vals[name]):
            errs.append(f"{name}: {msg}, got {vals[name]!r}")

    rng("nu", lambda v: v >= 1, "must be >= 1")
    rng("t_max", lambda v: v > 0, "must be > 0")
    rng("r", lambda v: v > 0, "must be > 0")
    rng("kappa", lambda v: v >= 0, "must be >= 0")
    rng("count", lambda v: v >= 1, "must be >= 1")
    rng("mesh_count", lambda v: v >= 2, "must be >= 2")
    rng("amplitude", lambda v: 0 <= v, "must be >= 0")
    rng("s_list", lambda v: len(v) > 0 and all(0 < s <= 1 for s in v), "entries must lie in (0, 1]")
    rng("nu_list", lambda v: len(v) > 0 and all(n >= 1 for n in v) and list(v) == sorted(v),
        "must be increasing positive integers")
    if "snapshot_times" in vals and "t_max" in vals:
        tm = vals["t_max"]
        if any(not (0 <= t <= tm) for t in vals["snapshot_times"]):
            errs.append(f"snapshot_times: entries must lie in [0, t_max={tm}]")
    if "amplitude" in vals and "r" in vals and vals["amplitude"] >= vals["r"]:
        errs.append(f"amplitude: must be below the ball radius r={vals['r']}")
    if errs:
        raise ConfigError(errs)
    return RunConfig(**vals)


def parse_config(text: str) -> RunConfig:
    """Parse TOML text into a validated ``RunConfig``; raises ``ConfigError``."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"parse error: {exc}"]) from None
    for k, v in raw.items():
        if isinstance(v, dict):
            raise ConfigError([f"{k}: nested tables are not supported, keep the file flat"])
    return validate(raw)


def load_config(path: str | Path) -> RunConfig:
    """Read a config file; a relative CSV ``initial`` is resolved against its directory."""
    path = Path(path)
    cfg = parse_config(path.read_text())
    if not cfg.initial_is_preset:
        p = Path(cfg.initial)
        if not p.is_absolute():
            cfg = cfg.replace(initial=str(path.parent / p))
    return cfg


def config_hash(cfg: RunConfig) -> str:
    blob = json.dumps(cfg.canonical(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
