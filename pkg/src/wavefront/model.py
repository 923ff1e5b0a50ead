"""2x2 systems written in Riemann invariants (w, z).

``w`` belongs to the genuinely nonlinear 1-field and ``z`` to the linearly
degenerate 2-field.  Only the data the front tracker needs is modelled: the
two eigenvalues, the z-jump across a 1-shock and the shock speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ContractError, DomainError, ModelAdmissibilityError

__all__ = ["State", "ModelSpec", "ValidationReport", "validate_model"]


class State(NamedTuple):
    w: float
    z: float


@dataclass(frozen=True)
class ModelSpec:
    """Synthetic model in Riemann coordinates.

    lambda1(w, z) = -1 + w + b z,  lambda2(w) = 1 + w,
    z jump across a 1-shock of strength sigma <= 0: kappa |sigma|^3.

    Subclasses may override ``_lambda1`` / ``_lambda2`` / ``shock_z_jump``;
    the raw ``_lambda*`` methods must accept numpy arrays.
    """

    b: float = 0.0
    kappa: float = 1.0
    r: float = 0.25

    def __post_init__(self):
        for name in ("b", "kappa", "r"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"model parameter {name} must be finite")
        if self.r <= 0:
            raise ValueError("admissible ball radius r must be positive")

    def _lambda1(self, w, z):
        return -1.0 + w + self.b * z

    def _lambda2(self, w):
        return 1.0 + w

    def in_ball(self, w: float, z: float) -> bool:
        return abs(w) <= self.r and abs(z) <= self.r

    def check_state(self, w: float, z: float) -> None:
        if not self.in_ball(w, z):
            raise DomainError(f"state (w={w!r}, z={z!r}) outside the ball of radius {self.r}")

    def lambda1(self, w: float, z: float) -> float:
        self.check_state(w, z)
        return float(self._lambda1(w, z))

    def lambda2(self, w: float) -> float:
        if abs(w) > self.r:
            raise DomainError(f"w={w!r} outside the ball of radius {self.r}")
        return float(self._lambda2(w))

    def shock_z_jump(self, sigma: float) -> float:
        if sigma > 0:
            raise ContractError(f"1-shock strength must be <= 0, got {sigma!r}")
        return self.kappa * abs(sigma) ** 3

    def shock_speed(self, left: State, right: State) -> float:
        """Mean of lambda1 at the two sides; Lax inequalities are enforced."""
        l_left = self.lambda1(*left)
        l_right = self.lambda1(*right)
        speed = 0.5 * (l_left + l_right)
        if left.w == right.w:
            return l_left
        if not (l_right < speed < l_left):
            raise ModelAdmissibilityError(
                f"Lax inequalities fail for shock {left} -> {right}: "
                f"lambda1 right {l_right!r}, speed {speed!r}, lambda1 left {l_left!r}"
            )
        return speed

    def params(self) -> dict:
        return {"b": self.b, "kappa": self.kappa, "r": self.r}


@dataclass
class ValidationReport:
    passed: bool = True
    failures: list[str] = field(default_factory=list)

    def fail(self, msg: str) -> None:
        self.passed = False
        self.failures.append(msg)


def validate_model(m: ModelSpec, resolution: float = 1e-2) -> ValidationReport:
    """Grid sweep of the ball checking the structural hypotheses.

    GNL sign (d lambda1/dw > 0), strict hyperbolicity with
    sup lambda1 < 0 < inf lambda2, z-independence of lambda2, the cubic
    shock law and Lax admissibility of sampled shock pairs.
    """
    rep = ValidationReport()
    n = max(2, int(round(2 * m.r / resolution)) + 1)
    grid = np.linspace(-m.r, m.r, n)
    W, Z = np.meshgrid(grid, grid, indexing="ij")

    h = min(1e-6, resolution * 1e-3)
    dl1 = (m._lambda1(W + h, Z) - m._lambda1(W - h, Z)) / (2 * h)
    if not np.all(dl1 > 0):
        i = np.unravel_index(np.argmin(dl1), dl1.shape)
        rep.fail(f"d lambda1/dw = {dl1[i]:.3g} <= 0 at (w, z) = ({W[i]:.4g}, {Z[i]:.4g})")

    l1 = np.broadcast_to(m._lambda1(W, Z), W.shape)
    if not l1.max() < 0:
        i = np.unravel_index(np.argmax(l1), l1.shape)
        rep.fail(f"sup lambda1 = {l1[i]:.4g} >= 0 at (w, z) = ({W[i]:.4g}, {Z[i]:.4g})")
    l2 = np.broadcast_to(m._lambda2(grid), grid.shape)
    if not l2.min() > 0:
        i = int(np.argmin(l2))
        rep.fail(f"inf lambda2 = {l2[i]:.4g} <= 0 at w = {grid[i]:.4g}")

    l2_z = np.array([m._lambda2(W[:, j]) for j in range(n)])
    if not np.all(l2_z == l2_z[0]):
        rep.fail("lambda2 depends on z")

    if m.kappa < 0:
        rep.fail(f"kappa = {m.kappa} < 0: z would decrease through 1-shocks")
    for e in range(2, 7):
        sig = -(10.0 ** -e)
        ratio = m.shock_z_jump(sig) / abs(sig) ** 3
        if not math.isclose(ratio, m.kappa, rel_tol=1e-6, abs_tol=1e-12):
            rep.fail(f"shock z-jump / |sigma|^3 = {ratio:.6g} at sigma = {sig:g}, expected {m.kappa}")
            break

    worst = None
    for wl in grid:
        for zl in grid:
            for wr in grid[grid < wl]:
                zr = zl + m.shock_z_jump(wr - wl)
                if abs(zr) > m.r:
                    continue
                a, c = m._lambda1(wl, zl), m._lambda1(wr, zr)
                mid = 0.5 * (a + c)
                if not (c < mid < a):
                    worst = (wl, zl, wr, zr)
                    break
            if worst:
                break
        if worst:
            break
    if worst:
        rep.fail("Lax inequalities fail for shock (w, z) = ({:.4g}, {:.4g}) -> ({:.4g}, {:.4g})".format(*worst))
    return rep
