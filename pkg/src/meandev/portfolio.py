"""Portfolio selection minimizing g(ES-deviation) + mean, with backtesting.

The per-period program replaces the tail average by its variational form,

    min over w in the simplex, x real:
        mean(L w) + g(x + mean((L w - x)+) / (1 - alpha) - mean(L w)),

which is jointly convex in (w, x) for convex g.  The solver is a projected
subgradient method on (w, x) with diminishing steps and a deterministic
equal-weight start; the exact objective (with x optimized out through the
sample tail average) is tracked every iteration and the best iterate wins.

Backtests rebalance on the first trading day of each calendar month using
the trailing window of losses, compound wealth by exp(-w . loss) daily, and
report annualized return, volatility, and the Sharpe ratio.
"""
from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field

import numpy as np

from .riskweight import ExpShortfallWeight, RiskWeightFunction

__all__ = [
    "LossPanel",
    "PortfolioWeights",
    "BacktestConfig",
    "BacktestReport",
    "MarkowitzResult",
    "ingest_prices",
    "parse_price_rows",
    "project_simplex",
    "portfolio_objective",
    "optimize_md",
    "run_backtest",
    "wealth_from_periods",
    "markowitz_baseline",
]

TRADING_DAYS_PER_YEAR = 252
_SUBGRADIENT_ITERATIONS = 5000
_SUBGRADIENT_STEP = 0.5
_MARKOWITZ_ITERATIONS = 2000


@dataclass(frozen=True)
class LossPanel:
    """Daily log-losses (negated log-returns), rows = dates, columns = assets."""

    dates: tuple
    tickers: tuple
    losses: np.ndarray

    def __post_init__(self):
        losses = np.asarray(self.losses, dtype=float)
        if losses.ndim != 2:
            raise ValueError("losses must be a 2-D matrix")
        if len(self.dates) != losses.shape[0]:
            raise ValueError("one date per loss row is required")
        if len(self.tickers) != losses.shape[1]:
            raise ValueError("one ticker per loss column is required")
        if not np.all(np.isfinite(losses)):
            raise ValueError("losses must all be finite")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("dates must be strictly increasing")
        object.__setattr__(self, "losses", losses)
        losses.setflags(write=False)

    @property
    def n_days(self) -> int:
        return self.losses.shape[0]

    @property
    def n_assets(self) -> int:
        return self.losses.shape[1]


@dataclass(frozen=True)
class PortfolioWeights:
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must form a nonempty vector")
        if np.any(w < -1e-12) or np.any(w > 1.0 + 1e-12):
            raise ValueError("weights must lie in [0, 1]")
        if abs(float(np.sum(w)) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        w = np.maximum(w, 0.0)
        w = w / np.sum(w)
        object.__setattr__(self, "w", w)
        w.setflags(write=False)


@dataclass(frozen=True)
class BacktestConfig:
    window: int = 500
    rebalance: str = "monthly"
    alpha: float = 0.9
    g_spec: RiskWeightFunction = field(default_factory=lambda: ExpShortfallWeight(10.0))
    risk_free_rate: float = 0.0213
    initial_wealth: float = 1.0

    def __post_init__(self):
        if self.window < 2:
            raise ValueError(f"window must be >= 2, got {self.window}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.rebalance != "monthly":
            raise ValueError(f"unsupported rebalance rule: {self.rebalance!r}")
        if self.initial_wealth <= 0.0:
            raise ValueError("initial wealth must be positive")


@dataclass(frozen=True)
class BacktestReport:
    dates: tuple
    wealth: np.ndarray
    annualized_return: float
    annualized_volatility: float
    sharpe_ratio: float
    periods: tuple  # (rebalance date, start row, end row, weight vector)

    def as_dict(self) -> dict:
        return {
            "annualized_return": self.annualized_return,
            "annualized_volatility": self.annualized_volatility,
            "sharpe_ratio": self.sharpe_ratio,
            "final_wealth": float(self.wealth[-1]),
            "days": len(self.dates),
            "rebalances": len(self.periods),
        }


@dataclass(frozen=True)
class MarkowitzResult:
    weights: PortfolioWeights
    target_daily_return: float
    target_clamped: bool


def parse_price_rows(rows, source: str = "<prices>") -> LossPanel:
    """Build a LossPanel from parsed CSV rows (header first); drops the first date."""
    rows = list(rows)
    if not rows:
        raise ValueError(f"{source}: empty price table")
    header = [c.strip() for c in rows[0]]
    if len(header) < 2 or header[0].lower() != "date":
        raise ValueError(f"{source}: header must be 'date' followed by one column per ticker")
    tickers = tuple(header[1:])
    dates: list[dt.date] = []
    prices: list[list[float]] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ValueError(f"{source}: row {lineno}: expected {len(header)} cells, got {len(row)}")
        try:
            date = dt.date.fromisoformat(row[0].strip())
        except ValueError as exc:
            raise ValueError(f"{source}: row {lineno}: bad date {row[0]!r}") from exc
        if dates and date <= dates[-1]:
            raise ValueError(f"{source}: row {lineno}: dates must be strictly increasing")
        values = []
        for ticker, cell in zip(tickers, row[1:]):
            cell = cell.strip()
            if not cell:
                raise ValueError(f"{source}: row {lineno}: missing price for {ticker}")
            try:
                price = float(cell)
            except ValueError as exc:
                raise ValueError(f"{source}: row {lineno}: bad price {cell!r} for {ticker}") from exc
            if not math.isfinite(price) or price <= 0.0:
                raise ValueError(f"{source}: row {lineno}: nonpositive price for {ticker}")
            values.append(price)
        dates.append(date)
        prices.append(values)
    if len(prices) < 2:
        raise ValueError(f"{source}: need at least two dates to form losses")
    matrix = np.asarray(prices, dtype=float)
    losses = -np.log(matrix[1:] / matrix[:-1])
    return LossPanel(dates=tuple(dates[1:]), tickers=tickers, losses=losses)


def ingest_prices(path: str) -> LossPanel:
    """Read a price CSV (date column plus one price column per ticker)."""
    with open(path, newline="") as fh:
        return parse_price_rows(csv.reader(fh), source=path)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sorting algorithm)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u) - 1.0
    ranks = np.arange(1, v.size + 1)
    valid = u * ranks > cumulative
    rho = int(np.nonzero(valid)[0][-1])
    theta = cumulative[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def _es_deviation_and_mean(portfolio_losses: np.ndarray, alpha: float) -> tuple[float, float]:
    """(ES_alpha - mean, mean) of a loss sample via the exact staircase tail."""
    xs = np.sort(portfolio_losses)
    n = xs.size
    mean = float(np.mean(xs))
    k = int(math.ceil(n * alpha))
    lower = float(np.sum(xs[: k - 1])) / n + xs[k - 1] * (alpha - (k - 1) / n)
    es = (mean - lower) / (1.0 - alpha)
    return es - mean, mean


def portfolio_objective(
    window: np.ndarray, w: np.ndarray, g: RiskWeightFunction, alpha: float
) -> float:
    """Exact per-period objective: g(ES-deviation of L w) + mean(L w)."""
    dev, mean = _es_deviation_and_mean(np.asarray(window) @ np.asarray(w), alpha)
    return float(g(max(dev, 0.0))) + mean


def optimize_md(window: np.ndarray, cfg: BacktestConfig) -> PortfolioWeights:
    """Minimize the per-period objective over the simplex.

    Projected subgradient on (w, x) jointly: normalized joint subgradient,
    step c / sqrt(k), 5000 iterations, equal-weight start.  Every iterate
    is scored with the exact objective (x optimized out via the sample tail
    average, the polish step) and the best one is returned.
    """
    window = np.asarray(window, dtype=float)
    if window.ndim != 2 or window.shape[0] < 2:
        raise ValueError("need a 2-D loss window with at least two rows")
    g = cfg.g_spec
    if not g.classify().is_convex:
        raise ValueError(
            "the per-period program is jointly convex only for convex "
            "risk-weighting functions; got a non-convex one"
        )
    n_obs, n_assets = window.shape
    if n_assets == 1:
        return PortfolioWeights(np.array([1.0]))

    alpha = cfg.alpha
    mu = window.mean(axis=0)
    w = np.full(n_assets, 1.0 / n_assets)
    portfolio = window @ w
    x = float(np.quantile(portfolio, alpha))

    best_w = w.copy()
    best_value = portfolio_objective(window, w, g, alpha)

    for k in range(1, _SUBGRADIENT_ITERATIONS + 1):
        portfolio = window @ w
        excess = portfolio > x
        z = x + float(np.mean(np.maximum(portfolio - x, 0.0))) / (1.0 - alpha) - float(
            np.mean(portfolio)
        )
        slope = g.left_derivative(z) if z > 0.0 else g.left_derivative(1e-12)
        grad_w = mu + slope * (window.T @ excess / (n_obs * (1.0 - alpha)) - mu)
        grad_x = slope * (1.0 - float(np.mean(excess)) / (1.0 - alpha))
        norm = math.sqrt(float(np.dot(grad_w, grad_w)) + grad_x * grad_x)
        if norm < 1e-15:
            break
        step = _SUBGRADIENT_STEP / (math.sqrt(k) * norm)
        w = project_simplex(w - step * grad_w)
        x = x - step * grad_x
        value = portfolio_objective(window, w, g, alpha)
        if value < best_value:
            best_value = value
            best_w = w.copy()

    return PortfolioWeights(best_w)


def _month_starts(dates) -> list[int]:
    starts = [0]
    for i in range(1, len(dates)):
        if (dates[i].year, dates[i].month) != (dates[i - 1].year, dates[i - 1].month):
            starts.append(i)
    return starts


def wealth_from_periods(panel: LossPanel, periods, initial_wealth: float) -> np.ndarray:
    """Compound wealth day by day from stored period weights (exact replay)."""
    chunks = []
    wealth = initial_wealth
    for _, start, end, w in periods:
        factors = np.exp(-(panel.losses[start:end] @ w))
        path = wealth * np.cumprod(factors)
        wealth = float(path[-1])
        chunks.append(path)
    return np.concatenate(chunks)


def run_backtest(panel: LossPanel, cfg: BacktestConfig) -> BacktestReport:
    """Monthly-rebalanced backtest on the trailing loss window, no transaction costs."""
    if panel.n_days < cfg.window + 1:
        raise ValueError(
            f"insufficient history: need more than window={cfg.window} rows, "
            f"got {panel.n_days}"
        )
    rebalance_rows = [i for i in _month_starts(panel.dates) if i >= cfg.window]
    if not rebalance_rows:
        raise ValueError("insufficient history: no month start after the first window")

    periods = []
    for j, start in enumerate(rebalance_rows):
        end = rebalance_rows[j + 1] if j + 1 < len(rebalance_rows) else panel.n_days
        weights = optimize_md(panel.losses[start - cfg.window : start], cfg)
        periods.append((panel.dates[start], start, end, weights.w))
    periods = tuple(periods)

    wealth = wealth_from_periods(panel, periods, cfg.initial_wealth)
    first_row = rebalance_rows[0]
    dates = tuple(panel.dates[first_row:])

    log_returns = np.concatenate(
        [-(panel.losses[start:end] @ w) for _, start, end, w in periods]
    )
    ar = TRADING_DAYS_PER_YEAR * float(np.mean(log_returns))
    if np.ptp(log_returns) == 0.0:
        av = 0.0  # all daily returns identical: volatility is exactly zero
    else:
        av = math.sqrt(TRADING_DAYS_PER_YEAR) * float(np.std(log_returns, ddof=1))
    sr = math.inf if av == 0.0 else (ar - cfg.risk_free_rate) / av
    return BacktestReport(
        dates=dates,
        wealth=wealth,
        annualized_return=ar,
        annualized_volatility=av,
        sharpe_ratio=sr,
        periods=periods,
    )


def _project_simplex_with_mean(v: np.ndarray, returns: np.ndarray, target: float) -> np.ndarray:
    """Projection onto the simplex intersected with a mean-return constraint.

    Shifts the point along the return vector before the simplex projection;
    the achieved mean return is monotone in the shift, so bisection finds
    the multiplier.  The target must already be feasible.
    """
    lo_val = float(np.min(returns))
    hi_val = float(np.max(returns))
    if hi_val - lo_val < 1e-15:
        return project_simplex(v)

    def achieved(tau: float) -> float:
        return float(returns @ project_simplex(v + tau * returns))

    lo, hi = -1.0, 1.0
    for _ in range(80):
        if achieved(lo) <= target:
            break
        lo *= 2.0
    for _ in range(80):
        if achieved(hi) >= target:
            break
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if achieved(mid) < target:
            lo = mid
        else:
            hi = mid
    return project_simplex(v + 0.5 * (lo + hi) * returns)


def markowitz_baseline(
    window: np.ndarray,
    target_return: float = 0.10,
    periods_per_year: int = TRADING_DAYS_PER_YEAR,
) -> MarkowitzResult:
    """Minimum-variance weights at a fixed annualized expected log-return.

    Projected gradient with a fixed step from an equal-weight start; an
    infeasible target is clamped to the nearest attainable daily mean
    return and flagged.
    """
    window = np.asarray(window, dtype=float)
    if window.ndim != 2 or window.shape[0] < 2:
        raise ValueError("need a 2-D loss window with at least two rows")
    n_assets = window.shape[1]
    if n_assets == 1:
        return MarkowitzResult(PortfolioWeights(np.array([1.0])),
                               float(-window.mean()), False)

    returns = -window.mean(axis=0)
    target = target_return / periods_per_year
    clamped = False
    lo, hi = float(np.min(returns)), float(np.max(returns))
    if target < lo:
        target, clamped = lo, True
    elif target > hi:
        target, clamped = hi, True

    cov = np.cov(window, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    eigmax = float(np.max(np.linalg.eigvalsh(cov)))
    step = 1.0 / (2.0 * eigmax + 1e-12)

    w = _project_simplex_with_mean(np.full(n_assets, 1.0 / n_assets), returns, target)
    for _ in range(_MARKOWITZ_ITERATIONS):
        w = _project_simplex_with_mean(w - step * (2.0 * cov @ w), returns, target)
    return MarkowitzResult(PortfolioWeights(w), target, clamped)
