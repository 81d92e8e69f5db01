"""Concave distortion functions and the signed Choquet deviation.

A distortion h is concave on [0, 1] with h(0) = h(1) = 0.  On a sample it
induces the deviation

    D_h(x) = sum_i h((n - i) / n) * (x_(i+1) - x_(i)),

the exact staircase integral of the empirical quantile weighted by h'.
The deviation is translation invariant, positively homogeneous, and (h
being concave) subadditive.  h'(1) = -1 is the range-normalization
criterion that makes D_h + mean a coherent functional with tight constant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .distributions import StateVector

__all__ = [
    "DistortionFunction",
    "ESDeviation",
    "Gini",
    "MeanAbsDevHalf",
    "RangeDistortion",
    "PiecewiseLinearDistortion",
    "ChoquetNorms",
    "left_derivative_h",
    "choquet_deviation",
    "h_norms",
    "q_norm",
    "is_range_normalized",
    "distortion_from_spec",
]

_RANGE_NORM_TOL = 1e-9


class DistortionFunction:
    """Base class; subclasses are immutable value objects."""

    def __call__(self, t):
        raise NotImplementedError

    def left_derivative(self, s: float) -> float:
        """lim_{u -> s-} (h(s) - h(u)) / (s - u); decreasing in s by concavity."""
        raise NotImplementedError

    def quantile_weight(self, u):
        """h'(1 - u): the weight on the u-quantile in the deviation integral.

        Computed directly in u so the upper tail (u near 1) does not lose
        precision to the 1 - u rounding.
        """
        raise NotImplementedError

    def kink_points(self) -> tuple[float, ...]:
        """Interior points of (0, 1) where h' jumps."""
        return ()

    def spec(self) -> dict:
        raise NotImplementedError

    # --- norms of h' ---------------------------------------------------

    def q_norm(self, q: float) -> float:
        """||h'||_q; math.inf is accepted for the sup norm."""
        return self.centered_norm_objective(0.0, q)

    def centered_norm_objective(self, x: float, q: float) -> float:
        """||h' - x||_q, the objective minimized by the centered norm."""
        raise NotImplementedError

    def derivative_range(self) -> tuple[float, float]:
        """(min h', max h') over (0, 1); brackets the optimal centering."""
        raise NotImplementedError

    def centered_q_norm(self, q: float) -> float:
        """[h]_q = min over constants x of ||h' - x||_q."""
        if q == math.inf:
            lo, hi = self.derivative_range()
            return (hi - lo) / 2.0
        lo, hi = self.derivative_range()
        if hi - lo < 1e-15:
            return 0.0
        res = minimize_scalar(
            lambda x: self.centered_norm_objective(x, q),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        # the objective is convex in x; guard with the bracket endpoints
        return float(min(res.fun, self.centered_norm_objective(lo, q),
                         self.centered_norm_objective(hi, q)))


def _atoms_norm(slopes: np.ndarray, lengths: np.ndarray, x: float, q: float) -> float:
    """||h' - x||_q when h' is piecewise constant with the given slopes."""
    if q == math.inf:
        return float(np.max(np.abs(slopes - x)))
    return float(np.sum(lengths * np.abs(slopes - x) ** q) ** (1.0 / q))


@dataclass(frozen=True)
class ESDeviation(DistortionFunction):
    """h(s) = min(s / (1 - alpha), 1) - s, the tail-average deviation at level alpha."""

    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.minimum(t / (1.0 - self.alpha), 1.0) - t

    def left_derivative(self, s: float) -> float:
        if s <= 0.0:
            raise ValueError(f"left derivative needs s in (0, 1], got {s}")
        if s <= 1.0 - self.alpha:
            return 1.0 / (1.0 - self.alpha) - 1.0
        return -1.0

    def quantile_weight(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(u >= self.alpha, 1.0 / (1.0 - self.alpha), 0.0) - 1.0

    def kink_points(self) -> tuple[float, ...]:
        return (1.0 - self.alpha,)

    def centered_norm_objective(self, x: float, q: float) -> float:
        a = self.alpha
        slopes = np.array([a / (1.0 - a), -1.0])
        lengths = np.array([1.0 - a, a])
        return _atoms_norm(slopes, lengths, x, q)

    def derivative_range(self) -> tuple[float, float]:
        return (-1.0, self.alpha / (1.0 - self.alpha))

    def spec(self) -> dict:
        return {"kind": "es_dev", "alpha": self.alpha}


@dataclass(frozen=True)
class Gini(DistortionFunction):
    """h(t) = t - t^2; the induced deviation is half the mean absolute difference."""

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return t - t * t

    def left_derivative(self, s: float) -> float:
        if s <= 0.0:
            raise ValueError(f"left derivative needs s in (0, 1], got {s}")
        return 1.0 - 2.0 * s

    def quantile_weight(self, u):
        return 2.0 * np.asarray(u, dtype=float) - 1.0

    def centered_norm_objective(self, x: float, q: float) -> float:
        if q == math.inf:
            return max(abs(1.0 - x), abs(1.0 + x))
        val, _ = quad(lambda t: abs(1.0 - 2.0 * t - x) ** q, 0.0, 1.0,
                      points=[min(max((1.0 - x) / 2.0, 0.0), 1.0)], limit=200)
        return val ** (1.0 / q)

    def derivative_range(self) -> tuple[float, float]:
        return (-1.0, 1.0)

    def spec(self) -> dict:
        return {"kind": "gini"}


@dataclass(frozen=True)
class MeanAbsDevHalf(DistortionFunction):
    """h(t) = min(t, 1 - t); half the mean absolute deviation."""

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.minimum(t, 1.0 - t)

    def left_derivative(self, s: float) -> float:
        if s <= 0.0:
            raise ValueError(f"left derivative needs s in (0, 1], got {s}")
        return 1.0 if s <= 0.5 else -1.0

    def quantile_weight(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(u >= 0.5, 1.0, -1.0)

    def kink_points(self) -> tuple[float, ...]:
        return (0.5,)

    def centered_norm_objective(self, x: float, q: float) -> float:
        slopes = np.array([1.0, -1.0])
        lengths = np.array([0.5, 0.5])
        return _atoms_norm(slopes, lengths, x, q)

    def derivative_range(self) -> tuple[float, float]:
        return (-1.0, 1.0)

    def spec(self) -> dict:
        return {"kind": "mad_half"}


@dataclass(frozen=True)
class RangeDistortion(DistortionFunction):
    """h = 1 on (0, 1), 0 at the endpoints; D_h is max - min (L^inf only)."""

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.where((t > 0.0) & (t < 1.0), 1.0, 0.0)

    def left_derivative(self, s: float) -> float:
        if s <= 0.0:
            raise ValueError(f"left derivative needs s in (0, 1], got {s}")
        return -math.inf if s >= 1.0 else 0.0

    def quantile_weight(self, u):
        raise ValueError("the range distortion has no integrable derivative")

    def centered_norm_objective(self, x: float, q: float) -> float:
        raise ValueError(
            "norm undefined: the range distortion is discontinuous, so ||h'||_q "
            "is infinite for every q"
        )

    def derivative_range(self) -> tuple[float, float]:
        raise ValueError("norm undefined for the range distortion")

    def spec(self) -> dict:
        return {"kind": "range"}


@dataclass(frozen=True)
class PiecewiseLinearDistortion(DistortionFunction):
    """Concave piecewise-linear h given by knots t (including 0 and 1) and values."""

    t: tuple
    h: tuple

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        h = np.asarray(self.h, dtype=float)
        if t.ndim != 1 or t.size < 2 or h.shape != t.shape:
            raise ValueError("need matching 1-D arrays of knots and values, length >= 2")
        if t[0] != 0.0 or t[-1] != 1.0:
            raise ValueError("knots must start at 0 and end at 1")
        if np.any(np.diff(t) <= 0):
            raise ValueError("knots must be strictly increasing")
        if h[0] != 0.0 or h[-1] != 0.0:
            raise ValueError("h(0) and h(1) must both be 0")
        slopes = np.diff(h) / np.diff(t)
        if np.any(np.diff(slopes) > 1e-12):
            raise ValueError("h must be concave: segment slopes must be non-increasing")
        object.__setattr__(self, "t", tuple(float(v) for v in t))
        object.__setattr__(self, "h", tuple(float(v) for v in h))

    def _arrays(self):
        return np.asarray(self.t), np.asarray(self.h)

    def _slopes(self):
        t, h = self._arrays()
        return np.diff(h) / np.diff(t), np.diff(t)

    def __call__(self, s):
        t, h = self._arrays()
        return np.interp(np.asarray(s, dtype=float), t, h)

    def left_derivative(self, s: float) -> float:
        if s <= 0.0:
            raise ValueError(f"left derivative needs s in (0, 1], got {s}")
        t, _ = self._arrays()
        slopes, _ = self._slopes()
        # segment whose half-open interval (t[i], t[i+1]] contains s
        i = int(np.searchsorted(t, s, side="left")) - 1
        return float(slopes[min(max(i, 0), slopes.size - 1)])

    def quantile_weight(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.array([self.left_derivative(max(1.0 - v, 1e-17)) for v in u])
        return out if out.size > 1 else float(out[0])

    def kink_points(self) -> tuple[float, ...]:
        return tuple(v for v in self.t[1:-1])

    def centered_norm_objective(self, x: float, q: float) -> float:
        slopes, lengths = self._slopes()
        return _atoms_norm(slopes, lengths, x, q)

    def derivative_range(self) -> tuple[float, float]:
        slopes, _ = self._slopes()
        return (float(np.min(slopes)), float(np.max(slopes)))

    def spec(self) -> dict:
        return {"kind": "piecewise_linear", "t": list(self.t), "h": list(self.h)}


@dataclass(frozen=True)
class ChoquetNorms:
    l2_norm: float
    centered_q_norm: float


def left_derivative_h(h: DistortionFunction, s: float) -> float:
    return h.left_derivative(s)


def choquet_deviation(h: DistortionFunction, x: StateVector) -> float:
    """Signed Choquet deviation of a sample: the order-statistic staircase sum.

    Equals the integral of the empirical quantile against h'(1 - u), computed
    exactly; zero on constant vectors, translation invariant, positively
    homogeneous, and subadditive for concave h.
    """
    xs = x.sorted_values()
    n = xs.size
    if n == 1:
        return 0.0
    levels = np.arange(n - 1, 0, -1, dtype=float) / n  # (n-i)/n for i = 1..n-1
    gaps = np.diff(xs)
    return float(np.dot(np.asarray(h(levels), dtype=float), gaps))


def q_norm(h: DistortionFunction, q: float) -> float:
    """||h'||_q for q in [1, inf]."""
    if q != math.inf and q < 1.0:
        raise ValueError(f"norm exponent must be >= 1, got {q}")
    return h.q_norm(q)


def h_norms(h: DistortionFunction, q: float) -> ChoquetNorms:
    """The 2-norm of h' together with the centered q-norm [h]_q."""
    if q != math.inf and q < 1.0:
        raise ValueError(f"norm exponent must be >= 1, got {q}")
    return ChoquetNorms(l2_norm=h.q_norm(2.0), centered_q_norm=h.centered_q_norm(q))


def is_range_normalized(h: DistortionFunction) -> bool:
    """True iff the left derivative of h at 1 equals -1 (tight coherence constant)."""
    d = h.left_derivative(1.0)
    return math.isfinite(d) and abs(d + 1.0) <= _RANGE_NORM_TOL


def distortion_from_spec(spec: dict) -> DistortionFunction:
    """Build a distortion from a JSON-style dict, e.g. {"kind": "es_dev", "alpha": 0.9}."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("distortion spec must be an object with a 'kind' field")
    kind = spec["kind"]
    if kind == "es_dev":
        return ESDeviation(alpha=float(spec["alpha"]))
    if kind == "gini":
        return Gini()
    if kind == "mad_half":
        return MeanAbsDevHalf()
    if kind == "range":
        return RangeDistortion()
    if kind == "piecewise_linear":
        return PiecewiseLinearDistortion(t=tuple(spec["t"]), h=tuple(spec["h"]))
    raise ValueError(f"unknown distortion kind: {kind!r}")
