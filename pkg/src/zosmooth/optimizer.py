"""Projected zeroth-order SGD driver with named step-size schedules.

One iteration applies ``x_{k+1} = proj_X(x_k - gamma_k * g_k)`` where
``g_k`` is a single-sample gradient estimate at smoothing radius ``eta_k``.
The schedules correspond to the analysis regimes:

==================== ==========================================================
kind                 (gamma_k, eta_k)
==================== ==========================================================
convex_diminishing   1/sqrt(n*(k+1)) for both
convex_constant      gamma = R/(L0*sqrt(n*K)), eta = 1/sqrt(n*K)
strongly_convex      theta/k for both, k >= 1, requires theta > 1/mu
nonconvex_fixed_eta  gamma = eta/(L0*sqrt(n)*sqrt(k+1)), eta fixed
nonconvex_asymptotic gamma = (k+1)^-alpha, eta = (k+1)^-beta,
                     0 < alpha, beta < 1 and 2*alpha - beta > 1
custom               gamma = gamma_scale*(k+1)^-alpha, eta = eta_scale*(k+1)^-beta
==================== ==========================================================

The strongly convex schedule is undefined at k = 0, so the driver feeds it
``k + 1``; iterate indexing shifts accordingly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .estimators import GradientSample, SmoothingParams
from .projections import FeasibleSet, project
from .rng import RandomStream

SCHEDULE_KINDS = (
    "convex_diminishing",
    "convex_constant",
    "strongly_convex",
    "nonconvex_fixed_eta",
    "nonconvex_asymptotic",
    "custom",
)


@dataclass(frozen=True)
class Schedule:
    """Step-size and smoothing sequences ``(gamma_k, eta_k)``."""

    kind: str
    n: int | None = None
    horizon: int | None = None
    radius_scale: float | None = None
    l0: float | None = None
    theta: float | None = None
    mu: float | None = None
    eta_fixed: float | None = None
    alpha: float | None = None
    beta: float | None = None
    gamma_scale: float = 1.0
    eta_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "convex_diminishing":
            self._require("n")
        elif self.kind == "convex_constant":
            self._require("n", "horizon", "radius_scale", "l0")
        elif self.kind == "strongly_convex":
            self._require("theta", "mu")
            if not self.theta > 1.0 / self.mu:
                raise ValueError(
                    f"strongly_convex requires theta > 1/mu; "
                    f"got theta={self.theta}, 1/mu={1.0 / self.mu}"
                )
        elif self.kind == "nonconvex_fixed_eta":
            self._require("eta_fixed", "l0", "n")
        elif self.kind == "nonconvex_asymptotic":
            self._require("alpha", "beta")
            if not (0 < self.alpha < 1 and 0 < self.beta < 1):
                raise ValueError("nonconvex_asymptotic requires 0 < alpha, beta < 1")
            if not 2 * self.alpha - self.beta > 1:
                raise ValueError(
                    "nonconvex_asymptotic requires 2*alpha - beta > 1; "
                    f"got alpha={self.alpha}, beta={self.beta}"
                )
        elif self.kind == "custom":
            self._require("alpha", "beta")

    def _require(self, *names: str) -> None:
        for name in names:
            if getattr(self, name) is None:
                raise ValueError(f"schedule kind {self.kind!r} requires {name!r}")

    @property
    def starts_at_one(self) -> bool:
        return self.kind == "strongly_convex"


def schedule_values(schedule: Schedule, k: int) -> tuple[float, float]:
    """Return ``(gamma_k, eta_k)`` for iteration index ``k``."""
    if k < 0:
        raise ValueError(f"iteration index must be >= 0, got {k}")
    kind = schedule.kind
    if kind == "convex_diminishing":
        g = 1.0 / math.sqrt(schedule.n * (k + 1))
        return g, g
    if kind == "convex_constant":
        gamma = schedule.radius_scale / (
            schedule.l0 * math.sqrt(schedule.n * schedule.horizon)
        )
        eta = 1.0 / math.sqrt(schedule.n * schedule.horizon)
        return gamma, eta
    if kind == "strongly_convex":
        if k < 1:
            raise ValueError("strongly_convex schedule is defined for k >= 1")
        g = schedule.theta / k
        return g, g
    if kind == "nonconvex_fixed_eta":
        eta = schedule.eta_fixed
        gamma = eta / (schedule.l0 * math.sqrt(schedule.n) * math.sqrt(k + 1))
        return gamma, eta
    if kind == "nonconvex_asymptotic":
        return (k + 1) ** -schedule.alpha, (k + 1) ** -schedule.beta
    if kind == "custom":
        return (
            schedule.gamma_scale * (k + 1) ** -schedule.alpha,
            schedule.eta_scale * (k + 1) ** -schedule.beta,
        )
    raise ValueError(f"unknown schedule kind {kind!r}")


def step(
    x_k: np.ndarray, gradient: np.ndarray, gamma_k: float, feasible: FeasibleSet
) -> np.ndarray:
    """One projected step ``proj_X(x_k - gamma_k * gradient)``."""
    x_k = np.asarray(x_k, dtype=float)
    gradient = np.asarray(gradient, dtype=float)
    if x_k.shape != gradient.shape:
        raise ValueError(
            f"dimension mismatch: iterate {x_k.shape} vs gradient {gradient.shape}"
        )
    return project(feasible, x_k - gamma_k * gradient)


@dataclass
class Checkpoint:
    k: int
    x: np.ndarray
    weighted_average: np.ndarray
    oracle_calls: int


@dataclass
class Trajectory:
    """Record of one optimization run.

    ``iterates`` holds ``x_0 .. x_K`` (or ``None`` when recording was
    disabled to bound memory); the gamma-weighted running average over
    ``x_0 .. x_{K-1}`` is always maintained.
    """

    iterates: np.ndarray | None
    gammas: np.ndarray
    etas: np.ndarray
    oracle_calls_cumulative: np.ndarray
    wall_time_ms: float
    final_x: np.ndarray
    weighted_sum: np.ndarray
    gamma_total: float
    checkpoints: dict[int, Checkpoint] = field(default_factory=dict)

    @property
    def iteration_count(self) -> int:
        return len(self.gammas)


EstimatorFn = Callable[..., GradientSample]


def run(
    oracle,
    estimator: EstimatorFn,
    schedule: Schedule,
    iterations: int,
    feasible: FeasibleSet,
    x0: np.ndarray,
    stream: RandomStream,
    record_iterates: bool = True,
    checkpoint_at: Sequence[int] = (),
) -> Trajectory:
    """Run ``iterations`` estimate-then-step updates from ``x0``.

    The initial point is projected onto the feasible set if necessary.  The
    trajectory is fully deterministic given the stream.  ``checkpoint_at``
    lists iteration counts ``k`` at which ``(x_k, xbar_k)`` snapshots are
    stored, enabling one run to serve several horizons.

    Wall time covers the iteration loop, including estimator work, and is
    measured with a monotonic clock.
    """
    if iterations < 0:
        raise ValueError(f"iterations must be >= 0, got {iterations}")
    x = project(feasible, np.asarray(x0, dtype=float))
    n = x.shape[0]
    offset = 1 if schedule.starts_at_one else 0
    wanted = set(int(k) for k in checkpoint_at)

    iterates = np.empty((iterations + 1, n)) if record_iterates else None
    if iterates is not None:
        iterates[0] = x
    gammas = np.empty(iterations)
    etas = np.empty(iterations)
    calls = np.empty(iterations, dtype=np.int64)
    weighted_sum = np.zeros(n)
    gamma_total = 0.0
    checkpoints: dict[int, Checkpoint] = {}
    total_calls = 0

    t0 = time.perf_counter()
    for k in range(iterations):
        if k in wanted:
            checkpoints[k] = _checkpoint(k, x, weighted_sum, gamma_total, total_calls)
        gamma_k, eta_k = schedule_values(schedule, k + offset)
        sample = estimator(oracle, x, SmoothingParams(eta_k), stream)
        weighted_sum += gamma_k * x
        gamma_total += gamma_k
        x = step(x, sample.estimate, gamma_k, feasible)
        total_calls += sample.oracle_calls
        gammas[k] = gamma_k
        etas[k] = eta_k
        calls[k] = total_calls
        if iterates is not None:
            iterates[k + 1] = x
    wall_ms = (time.perf_counter() - t0) * 1000.0

    if iterations in wanted:
        checkpoints[iterations] = _checkpoint(
            iterations, x, weighted_sum, gamma_total, total_calls
        )
    return Trajectory(
        iterates=iterates,
        gammas=gammas,
        etas=etas,
        oracle_calls_cumulative=calls,
        wall_time_ms=wall_ms,
        final_x=x.copy(),
        weighted_sum=weighted_sum,
        gamma_total=gamma_total,
        checkpoints=checkpoints,
    )


def _checkpoint(
    k: int, x: np.ndarray, weighted_sum: np.ndarray, gamma_total: float, calls: int
) -> Checkpoint:
    average = weighted_sum / gamma_total if gamma_total > 0 else x.copy()
    return Checkpoint(k=k, x=x.copy(), weighted_average=average, oracle_calls=calls)


def weighted_average(trajectory: Trajectory) -> np.ndarray:
    """Gamma-weighted mean of the iterates ``x_0 .. x_{K-1}``."""
    if trajectory.gamma_total <= 0:
        raise ValueError("trajectory has no accumulated steps")
    return trajectory.weighted_sum / trajectory.gamma_total


def sample_random_iterate(trajectory: Trajectory, stream: RandomStream) -> np.ndarray:
    """Draw ``x_j`` with ``P[j] = gamma_j / sum(gamma)`` over ``j < K``.

    Requires the trajectory to have recorded iterates.
    """
    if trajectory.iterates is None:
        raise ValueError("trajectory was run with record_iterates=False")
    weights = trajectory.gammas / trajectory.gammas.sum()
    j = int(stream.generator.choice(len(weights), p=weights))
    return trajectory.iterates[j].copy()
