"""Decision-dependent oracle protocols and their gradient estimators.

When the noise distribution depends on the decision ``x``, the plain
estimators of :mod:`zosmooth.estimators` are biased.  Two protocols restore
unbiasedness for the gradient of the mollified objective:

* **Known conditional density** -- draw ``xi`` from a fixed reference
  density ``p_ref`` and reweight each evaluation by the importance ratio
  ``p(xi | x) / p_ref(xi)`` (:func:`esgs_dd_known`).

* **Unknown density / random field** -- query an oracle that returns
  correlated noise realizations indexed by the evaluation points, with
  marginals ``D(x)`` and mean-square increments controlled by the point
  separation (:func:`esgs_dd_unknown`).

Both estimators reuse one ``(V, Z)`` perturbation across all coordinates
and consume ``2n`` oracle calls per estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .estimators import SQRT_2PI, GradientSample, SmoothingParams
from .rng import RandomStream, sample_exponential, sample_gaussian_vector


class RatioBoundError(RuntimeError):
    """Importance ratio exceeded the declared uniform bound."""


class ValueBoundError(RuntimeError):
    """Oracle value exceeded the declared uniform bound."""


@dataclass
class KnownDensityOracle:
    """Decision-dependent oracle with an available conditional density.

    Fields
    ------
    f_hat : callable
        ``f_hat(x, xi) -> float``, the raw objective integrand.
    cond_density : callable
        ``cond_density(xi, x) -> float``, the conditional density of the
        noise under decision ``x``.
    ref_density : callable
        ``ref_density(xi) -> float``, the fixed positive reference density.
    ref_sampler : callable
        ``ref_sampler(stream) -> xi`` drawing from the reference density.
    ratio_bound_m : float
        Uniform bound on ``cond_density / ref_density``; checked on every
        evaluation, violations raise :class:`RatioBoundError`.
    value_bound_mf : float
        Uniform bound on ``|f_hat|`` at sampled points.
    lip_f_hat : float
        Lipschitz constant of ``f_hat(., xi)`` in the reference L2 metric.
    lip_xi : float
        Sensitivity constant: the symmetric KL divergence between
        ``p(. | x)`` and ``p(. | y)`` is at most ``lip_xi^2 ||x - y||^2``.
    """

    f_hat: Callable[[np.ndarray, Any], float]
    cond_density: Callable[[Any, np.ndarray], float]
    ref_density: Callable[[Any], float]
    ref_sampler: Callable[[RandomStream], Any]
    ratio_bound_m: float
    value_bound_mf: float
    lip_f_hat: float
    lip_xi: float

    def weighted_value(self, x: np.ndarray, xi: Any) -> float:
        """``f_hat(x, xi) * p(xi | x) / p_ref(xi)`` with bound checks."""
        ratio = self.cond_density(xi, x) / self.ref_density(xi)
        if ratio > self.ratio_bound_m:
            raise RatioBoundError(
                f"density ratio {ratio:.6g} exceeds bound {self.ratio_bound_m:.6g} "
                f"at xi={xi!r}"
            )
        value = self.f_hat(x, xi)
        if abs(value) > self.value_bound_mf:
            raise ValueBoundError(
                f"|f_hat| = {abs(value):.6g} exceeds bound {self.value_bound_mf:.6g}"
            )
        return value * ratio


@dataclass
class RandomFieldOracle:
    """Decision-dependent oracle backed by a correlated random field.

    ``field_sampler(x_plus, x_minus, stream)`` returns one pair
    ``(xi_1, xi_2)`` whose marginal laws are ``D(x_plus)`` and
    ``D(x_minus)`` and whose mean-square difference satisfies
    ``E||xi_1 - xi_2||^2 <= c_xi * ||x_plus - x_minus||^2``.  Each call is an
    independent realization of the field.
    """

    f_hat: Callable[[np.ndarray, Any], float]
    field_sampler: Callable[
        [np.ndarray, np.ndarray, RandomStream], tuple[Any, Any]
    ]
    c_xi: float


def esgs_dd_known(
    oracle: KnownDensityOracle,
    x: np.ndarray,
    params: SmoothingParams,
    stream: RandomStream,
) -> GradientSample:
    """Importance-reweighted exponential-shift estimate (known density).

    Draws ``xi`` from the reference density, then differences the
    ratio-weighted oracle at the coordinate-replacement points, sharing
    ``(V, Z, xi)`` across components.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    eta = params.eta
    xi = oracle.ref_sampler(stream)
    v = sample_exponential(stream)
    z = sample_gaussian_vector(n, eta, stream)
    shift = eta * math.sqrt(2.0 * v)
    base = x - z
    estimate = np.empty(n)
    point = base.copy()
    for i in range(n):
        saved = point[i]
        point[i] = x[i] + shift
        w_plus = oracle.weighted_value(point, xi)
        point[i] = x[i] - shift
        w_minus = oracle.weighted_value(point, xi)
        point[i] = saved
        estimate[i] = (w_plus - w_minus) / (eta * SQRT_2PI)
    return GradientSample(estimate=estimate, v=v, z=z, oracle_calls=2 * n)


def esgs_dd_unknown(
    oracle: RandomFieldOracle,
    x: np.ndarray,
    params: SmoothingParams,
    stream: RandomStream,
) -> GradientSample:
    """Random-field exponential-shift estimate (unknown density).

    For each coordinate the field is queried at the pair of evaluation
    points, producing correlated noise with the correct marginals; the
    ``(V, Z)`` perturbation is shared across coordinates while field pairs
    are drawn fresh per coordinate.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    eta = params.eta
    v = sample_exponential(stream)
    z = sample_gaussian_vector(n, eta, stream)
    shift = eta * math.sqrt(2.0 * v)
    base = x - z
    estimate = np.empty(n)
    point_plus = base.copy()
    point_minus = base.copy()
    for i in range(n):
        saved = base[i]
        point_plus[i] = x[i] + shift
        point_minus[i] = x[i] - shift
        xi_1, xi_2 = oracle.field_sampler(point_plus, point_minus, stream)
        f_plus = oracle.f_hat(point_plus, xi_1)
        f_minus = oracle.f_hat(point_minus, xi_2)
        estimate[i] = (f_plus - f_minus) / (eta * SQRT_2PI)
        point_plus[i] = saved
        point_minus[i] = saved
    return GradientSample(estimate=estimate, v=v, z=z, oracle_calls=2 * n)


def kl_sym_normal(mean_x: float, mean_y: float, sigma: float) -> float:
    """Symmetric KL divergence between two normals with common variance.

    Equals ``(mean_x - mean_y)^2 / sigma^2`` (each one-directional term
    contributes half).
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    d = mean_x - mean_y
    return d * d / (sigma * sigma)


def field_correlation(
    x_plus: float, x_minus: float, c_xi: float, beta: float, sigma: float
) -> float:
    """Correlation making a Gaussian field mean-square Lipschitz.

    For marginals ``N(a + beta*x, sigma^2)`` indexed by a scalar ``x``, the
    pair correlation ``max(1 - (c_xi - beta^2)(x_plus - x_minus)^2 /
    (2 sigma^2), -1)`` yields ``E[(xi_plus - xi_minus)^2] <= c_xi
    (x_plus - x_minus)^2``.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if c_xi < beta * beta:
        raise ValueError(f"c_xi must be >= beta^2, got c_xi={c_xi}, beta={beta}")
    d = x_plus - x_minus
    return max(1.0 - (c_xi - beta * beta) * d * d / (2.0 * sigma * sigma), -1.0)
