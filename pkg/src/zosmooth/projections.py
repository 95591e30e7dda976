"""Euclidean projections onto the feasible sets used by the benchmark suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FeasibleSet:
    """A feasible set: unconstrained, a box, or a Euclidean ball.

    Use the constructors :meth:`unconstrained`, :meth:`box`, and
    :meth:`ball` rather than instantiating directly.
    """

    variant: str
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    center: np.ndarray | None = None
    radius: float | None = None

    @staticmethod
    def unconstrained() -> "FeasibleSet":
        return FeasibleSet("unconstrained")

    @staticmethod
    def box(lo, hi) -> "FeasibleSet":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape:
            raise ValueError("box bounds must have matching shapes")
        if np.any(lo > hi):
            raise ValueError("box requires lo <= hi componentwise")
        return FeasibleSet("box", lo=lo, hi=hi)

    @staticmethod
    def symmetric_box(half_width: float, n: int) -> "FeasibleSet":
        """The box [-half_width, half_width]^n."""
        return FeasibleSet.box(-half_width * np.ones(n), half_width * np.ones(n))

    @staticmethod
    def ball(center, radius: float) -> "FeasibleSet":
        center = np.atleast_1d(np.asarray(center, dtype=float))
        if radius <= 0:
            raise ValueError(f"ball radius must be > 0, got {radius}")
        return FeasibleSet("ball", center=center, radius=float(radius))

    @staticmethod
    def unit_ball(n: int) -> "FeasibleSet":
        return FeasibleSet.ball(np.zeros(n), 1.0)


def project(feasible: FeasibleSet, u: np.ndarray) -> np.ndarray:
    """Euclidean projection of ``u`` onto ``feasible``.

    Idempotent and non-expansive; raises on dimension mismatch.
    """
    u = np.asarray(u, dtype=float)
    if feasible.variant == "unconstrained":
        return u.copy()
    if feasible.variant == "box":
        if u.shape != feasible.lo.shape:
            raise ValueError(
                f"dimension mismatch: point {u.shape} vs box {feasible.lo.shape}"
            )
        return np.clip(u, feasible.lo, feasible.hi)
    if feasible.variant == "ball":
        if u.shape != feasible.center.shape:
            raise ValueError(
                f"dimension mismatch: point {u.shape} vs ball {feasible.center.shape}"
            )
        d = u - feasible.center
        norm = float(np.linalg.norm(d))
        if norm <= feasible.radius:
            return u.copy()
        # rescaling can land one ulp outside; repeat so projection is exactly
        # idempotent (the next call then takes the interior branch)
        while norm > feasible.radius:
            d = d * (feasible.radius / norm)
            norm = float(np.linalg.norm(d))
        return feasible.center + d
    raise ValueError(f"unknown feasible set variant {feasible.variant!r}")


def contains(feasible: FeasibleSet, x: np.ndarray, tol: float = 1e-12) -> bool:
    """Membership test with absolute tolerance ``tol``."""
    x = np.asarray(x, dtype=float)
    if feasible.variant == "unconstrained":
        return True
    if feasible.variant == "box":
        return bool(
            np.all(x >= feasible.lo - tol) and np.all(x <= feasible.hi + tol)
        )
    if feasible.variant == "ball":
        return float(np.linalg.norm(x - feasible.center)) <= feasible.radius + tol
    raise ValueError(f"unknown feasible set variant {feasible.variant!r}")
