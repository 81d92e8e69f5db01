"""Plug-in estimation and its Gaussian limit.

The empirical estimator of g(D(X)) + E[X] is asymptotically normal around
the population value, with a variance given by a double quantile integral.
This script computes the population pairs (center, variance) for six
model/weighting combinations and then verifies one of them by Monte Carlo,
writing the replication estimates to a CSV ready for histogram plotting.
"""
import numpy as np

from meandev import (
    ESDeviation,
    ExpCapWeight,
    ExpShortfallWeight,
    Gini,
    LinearWeight,
    Lomax,
    MDMeasure,
    Normal,
    md_true,
    monte_carlo,
    sigma_g_squared,
)

h = ESDeviation(0.9)

print("=" * 72)
print("1. Population value and asymptotic variance, six combinations")
print("=" * 72)
cases = [
    ("normal,  g = exp_shortfall(1)", Normal(), ExpShortfallWeight(1.0)),
    ("normal,  g = identity (pure tail average)", Normal(), LinearWeight(1.0)),
    ("normal,  g = exp_cap(1)", Normal(), ExpCapWeight(1.0)),
    ("lomax(4), g = exp_shortfall(1)", Lomax(4.0), ExpShortfallWeight(1.0)),
    ("lomax(4), g = identity", Lomax(4.0), LinearWeight(1.0)),
    ("lomax(4), g = exp_cap(1)", Lomax(4.0), ExpCapWeight(1.0)),
]
for label, model, g in cases:
    m = MDMeasure(g, h)
    center = md_true(model, m)
    variance = sigma_g_squared(model, m)
    print(f"  {label:<45} N({center:.2f}, {variance:.2f}/n)")
print()
print("note: the 1-Lipschitz weighting always shrinks the variance relative")
print("to the undamped tail average — risk sensitivity trades off against")
print("estimation error.")

print()
print("=" * 72)
print("2. Variance is monotone in the slope of the weighting")
print("=" * 72)
for lam in (1.0, 0.8, 0.5, 0.2):
    v = sigma_g_squared(Normal(), MDMeasure(LinearWeight(lam), h))
    print(f"  lambda = {lam:.1f}: sigma^2 = {v:.3f}")

print()
print("=" * 72)
print("3. Monte Carlo check (n = 10^4, 1000 replications)")
print("=" * 72)
m = MDMeasure(ExpShortfallWeight(1.0), h)
report = monte_carlo(Normal(), m, n=10_000, replications=1000, seed=2024)
print(f"  center (quadrature):    {report.center:.4f}")
print(f"  mean of estimates:      {report.estimate_mean:.4f}")
print(f"  target sigma^2:         {report.target_variance:.3f}")
print(f"  n * Var(estimates):     {report.scaled_variance:.3f}")
print(f"  KS distance to normal:  {report.normality_statistic:.4f}")

out = "mc_estimates.csv"
np.savetxt(out, report.estimates, header="estimate", comments="")
print(f"  wrote {report.replications} estimates to {out} (histogram-ready)")

print()
print("=" * 72)
print("4. The same machinery with the Gini deviation")
print("=" * 72)
for model in (Normal(), Lomax(4.0)):
    m = MDMeasure(ExpShortfallWeight(1.0), Gini())
    print(f"  {model.spec()['kind']:<12} N({md_true(model, m):.2f}, "
          f"{sigma_g_squared(model, m):.2f}/n)")
