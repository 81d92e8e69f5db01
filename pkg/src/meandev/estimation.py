"""Population values, asymptotic variance, and a Monte Carlo harness.

The population deviation is the quantile integral of h'(1 - u); the
asymptotic variance of the plug-in estimator is the double integral of

    (h'(1-s) g'(D) + 1)(h'(1-t) g'(D) + 1)(s^t - st) / (f~(s) f~(t)).

Since s^t - st is the covariance kernel of the Brownian bridge, it factors
as an integral over indicator residuals, which collapses the double
integral to nested one-dimensional quadratures:

    sigma^2 = integral over u of J(u)^2,
    J(u)    = integral over s of w(s) (1{s >= u} - s) / f~(s),

with w(s) = h'(1-s) g'(D) + 1.  Both levels use exponential substitutions
at the endpoints (u = e^-t and u = 1 - e^-t), which keeps the tail factors
exact and detects non-integrable tails by comparing truncations.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.stats import kstest

from .distributions import ParametricModel
from .measures import MDMeasure, md_eval

__all__ = [
    "GaussianLimit",
    "MonteCarloReport",
    "NumericsError",
    "md_true",
    "deviation_true",
    "sigma_g_squared",
    "gaussian_limit",
    "monte_carlo",
    "worker_count",
]

_LOG_HALF = math.log(2.0)
# Beyond t = 36 the level 1 - e^-t is no longer distinguishable from 1.0 in
# float64, so integration stops there; a convergent tail must have negligible
# mass in the last resolvable window [30, 36].
_TAIL_CUTOFF = 36.0
_TAIL_CHECK = 30.0


class NumericsError(RuntimeError):
    """Raised when a population integral fails to converge under refinement."""


@dataclass(frozen=True)
class GaussianLimit:
    """Center and variance of the sqrt(n)-scaled limit of the plug-in estimator."""

    center: float
    variance: float

    def __post_init__(self):
        if self.variance < 0.0:
            raise ValueError("variance must be nonnegative")


@dataclass(frozen=True)
class MonteCarloReport:
    replications: int
    sample_size: int
    estimates: np.ndarray
    scaled_variance: float
    target_variance: float
    center: float
    estimate_mean: float
    normality_statistic: float

    def as_dict(self) -> dict:
        return {
            "replications": self.replications,
            "sample_size": self.sample_size,
            "scaled_variance": self.scaled_variance,
            "target_variance": self.target_variance,
            "center": self.center,
            "estimate_mean": self.estimate_mean,
            "normality_statistic": self.normality_statistic,
        }


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _panel_quadrature(breaks: np.ndarray):
    """Gauss-Legendre nodes/weights across consecutive panels of ``breaks``."""
    los, his = breaks[:-1], breaks[1:]
    half = 0.5 * (his - los)
    mid = 0.5 * (his + los)
    t = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return t, w


def _tail_breaks(points_t, lo_t: float, hi_t: float, max_width: float = 3.0) -> np.ndarray:
    """Panel edges on [lo_t, hi_t] splitting at ``points_t`` and capping width."""
    edges = [lo_t, hi_t] + [t for t in points_t if lo_t < t < hi_t]
    edges = np.array(sorted(set(edges)))
    out = [edges[0]]
    for right in edges[1:]:
        left = out[-1]
        pieces = max(1, int(math.ceil((right - left) / max_width)))
        out.extend(left + (right - left) * np.arange(1, pieces + 1) / pieces)
    return np.asarray(out)


def _half_integral(fn, upper: bool, points, limit: int, lo_t: float, hi_t: float) -> float:
    """Integral of the substituted integrand over t in [lo_t, hi_t].

    The substitution is u = e^-t (lower half) or u = 1 - e^-t (upper half),
    so the integrand is evaluated with the exact tail probability;
    ``points`` are interior breakpoints of fn in the u domain.
    """
    if upper:
        def transformed(t: float) -> float:
            eps = math.exp(-t)
            return fn(1.0 - eps, eps) * eps
    else:
        def transformed(t: float) -> float:
            eps = math.exp(-t)
            return fn(eps, 1.0 - eps) * eps

    mapped = []
    for p in points:
        frac = 1.0 - p if upper else p
        if 0.0 < frac < 0.5:
            t = -math.log(frac)
            if lo_t < t < hi_t:
                mapped.append(t)
    with warnings.catch_warnings():
        # slow-but-converging tails exhaust subdivisions without harming the
        # estimate; actual divergence is caught by the tail-mass check
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(transformed, lo_t, hi_t, points=sorted(mapped) or None,
                      limit=limit)
    return val


def _unit_integral(fn, points=(), limit: int = 200, check_tails: bool = False) -> float:
    """Integral over (0, 1) of fn(u, 1 - u) with endpoint substitutions.

    fn receives both the level and its complement so tail evaluations stay
    exact.  With ``check_tails`` the far-tail extension pieces are computed
    separately; non-negligible mass there flags a divergent tail.
    """
    lower = _half_integral(fn, False, points, limit, _LOG_HALF, _TAIL_CHECK)
    upper = _half_integral(fn, True, points, limit, _LOG_HALF, _TAIL_CHECK)
    lower_ext = _half_integral(fn, False, points, limit, _TAIL_CHECK, _TAIL_CUTOFF)
    upper_ext = _half_integral(fn, True, points, limit, _TAIL_CHECK, _TAIL_CUTOFF)
    total = lower + upper + lower_ext + upper_ext
    if check_tails:
        scale = max(abs(total), 1e-30)
        if abs(lower_ext) + abs(upper_ext) > 1e-3 * scale:
            raise NumericsError(
                "integral does not converge under tail refinement: the "
                "integrand decays too slowly near the endpoints (the model's "
                "tails are too heavy for this functional)"
            )
    if not math.isfinite(total):
        raise NumericsError("integral evaluated to a non-finite value")
    return total


def deviation_true(model: ParametricModel, m: MDMeasure, quad_points: int = 200) -> float:
    """Population Choquet deviation: integral of the quantile against h'(1 - u)."""
    h = m.h

    def fn(u: float, eps: float) -> float:
        if eps < 0.5:
            quantile = float(model.quantile_upper(eps))
        else:
            quantile = float(model.quantile(u))
        return quantile * float(h.quantile_weight(u))

    kinks = [1.0 - s for s in h.kink_points()]
    return _unit_integral(fn, points=kinks, limit=quad_points, check_tails=True)


def md_true(model: ParametricModel, m: MDMeasure, quad_points: int = 200) -> float:
    """Population value g(D(X)) + E[X]."""
    mean = model.mean()  # raises for heavy tails with no mean
    dev = deviation_true(model, m, quad_points)
    return float(m.g(dev)) + mean


def sigma_g_squared(model: ParametricModel, m: MDMeasure, quad_points: int = 200) -> float:
    """Asymptotic variance of the plug-in estimator of g(D) + mean."""
    dev = deviation_true(model, m, quad_points)
    gprime = m.g.left_derivative(dev) if dev > 0.0 else m.g.left_derivative(1e-12)
    h = m.h
    kinks = [1.0 - s for s in h.kink_points()]
    kinks_lower_t = [-math.log(p) for p in kinks if p < 0.5]
    kinks_upper_t = [-math.log(1.0 - p) for p in kinks if p >= 0.5]

    def residual_integral(u: float) -> float:
        """J(u): integral over s of w(s) (1{s >= u} - s) / f~(s).

        Evaluated with Gauss-Legendre panels in the substituted variable,
        split at the indicator jump and the kinks of h', and vectorized
        over the nodes.
        """
        total = 0.0
        for upper in (False, True):
            extra = []
            frac = 1.0 - u if upper else u
            if 0.0 < frac < 0.5:
                extra.append(-math.log(frac))
            base = kinks_upper_t if upper else kinks_lower_t
            breaks = _tail_breaks(base + extra, _LOG_HALF, _TAIL_CUTOFF)
            t, w = _panel_quadrature(breaks)
            eps = np.exp(-t)
            s = 1.0 - eps if upper else eps
            density = model.density_quantile_upper(eps) if upper else model.density_quantile(s)
            values = (
                (np.asarray(h.quantile_weight(s), dtype=float) * gprime + 1.0)
                * ((s >= u).astype(float) - s)
                / density
            ) * eps
            total += float(np.dot(w, values))
        return total

    def outer(u: float, eps: float) -> float:
        j = residual_integral(u)
        return j * j

    # fast-path divergence probe: the substituted upper-tail integrand of a
    # convergent variance must not grow along the tail
    probe = [outer(1.0 - math.exp(-t), math.exp(-t)) * math.exp(-t) for t in (24.0, 30.0)]
    if probe[1] > 2.0 * probe[0] and probe[1] > 1e-12:
        raise NumericsError(
            "asymptotic-variance integral diverges: the tail of the quantile "
            "density is too heavy for a finite-variance Gaussian limit"
        )

    return _unit_integral(outer, points=kinks, limit=quad_points, check_tails=True)


def gaussian_limit(model: ParametricModel, m: MDMeasure, quad_points: int = 200) -> GaussianLimit:
    return GaussianLimit(
        center=md_true(model, m, quad_points),
        variance=sigma_g_squared(model, m, quad_points),
    )


def worker_count() -> int:
    env = os.environ.get("MEANDEV_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def monte_carlo(
    model: ParametricModel,
    m: MDMeasure,
    n: int,
    replications: int,
    seed: int,
    quad_points: int = 200,
) -> MonteCarloReport:
    """Sample `replications` estimates of g(D) + mean at sample size n.

    Per-replication generators come from spawning the master seed, so the
    result does not depend on execution order; replications run on a thread
    pool capped by MEANDEV_THREADS.
    """
    if n < 100:
        raise ValueError(f"sample size must be >= 100, got {n}")
    if replications < 100:
        raise ValueError(f"replications must be >= 100, got {replications}")

    limit = gaussian_limit(model, m, quad_points)
    children = np.random.SeedSequence(seed).spawn(replications)

    def one(child) -> float:
        return md_eval(m, model.sample(n, child))

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            estimates = np.fromiter(pool.map(one, children), dtype=float,
                                    count=replications)
    else:
        estimates = np.fromiter((one(c) for c in children), dtype=float,
                                count=replications)

    scaled_var = float(n * np.var(estimates, ddof=1))
    standardized = (estimates - limit.center) * math.sqrt(n / limit.variance)
    ks = float(kstest(standardized, "norm").statistic)
    return MonteCarloReport(
        replications=replications,
        sample_size=n,
        estimates=estimates,
        scaled_variance=scaled_var,
        target_variance=limit.variance,
        center=limit.center,
        estimate_mean=float(np.mean(estimates)),
        normality_statistic=ks,
    )
