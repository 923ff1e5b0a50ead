"""Initial data sources: named presets and (x, w, z) CSV files.

All sources return sample arrays in the left-continuous convention used by
``discretize_initial``: sample ``i`` holds on ``(x[i-1], x[i]]``.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import ContractError
from .model import ModelSpec

__all__ = ["random_steps", "two_shock", "pure_cd", "read_samples_csv", "samples_for"]

Samples = tuple[list[float], list[float], list[float]]


def random_steps(seed: int, count: int, amplitude: float) -> Samples:
    """``count`` steps at sorted uniform positions in [0, 1], heights uniform in
    ``[-amplitude, amplitude]`` for both w and z, zero outside the support."""
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0.0, 1.0, count + 1))
    w = rng.uniform(-amplitude, amplitude, count + 1)
    z = rng.uniform(-amplitude, amplitude, count + 1)
    w[0] = w[-1] = 0.0
    z[0] = z[-1] = 0.0
    return x.tolist(), w.tolist(), z.tolist()


def two_shock(m: ModelSpec) -> Samples:
    """Two decreasing w steps of 0.1 on the 1-shock curve: two shocks that merge."""
    g = m.shock_z_jump(-0.1)
    return [0.0, 1.0, 2.0], [0.1, 0.0, -0.1], [0.0, g, 2 * g]


def pure_cd(seed: int, count: int, amplitude: float) -> Samples:
    """w identically zero and random z steps: contacts only."""
    x, _, z = random_steps(seed, count, amplitude)
    return x, [0.0] * len(x), z


def read_samples_csv(path: str | Path) -> Samples:
    """Columns ``x, w, z`` with a header row; x strictly increasing."""
    xs, ws, zs = [], [], []
    with open(path, newline="") as fh:
        rows = csv.DictReader(row for row in fh if not row.startswith("#"))
        missing = {"x", "w", "z"} - set(rows.fieldnames or [])
        if missing:
            raise ContractError(f"{path}: missing column(s) {sorted(missing)}")
        for n, row in enumerate(rows, start=2):
            try:
                xs.append(float(row["x"]))
                ws.append(float(row["w"]))
                zs.append(float(row["z"]))
            except ValueError as exc:
                raise ContractError(f"{path}:{n}: {exc}") from None
    if not xs:
        raise ContractError(f"{path}: no samples")
    return xs, ws, zs


def samples_for(cfg, m: ModelSpec) -> Samples:
    if cfg.initial == "random-steps":
        return random_steps(cfg.seed, cfg.count, cfg.amplitude)
    if cfg.initial == "two-shock":
        return two_shock(m)
    if cfg.initial == "pure-cd":
        return pure_cd(cfg.seed, cfg.count, cfg.amplitude)
    return read_samples_csv(cfg.initial)
