"""Worst-case risk under partial information.

Two uncertainty settings admit closed or one-dimensional reductions:

  * knowing only the mean and a dispersion level, the worst case is
    g(v * [h]_q) + m with a norm of the distortion derivative;
  * inside a type-2 Wasserstein ball, a single trade-off parameter splits
    the budget between shifting the mean and inflating the deviation.

The printed tables are the plot-ready analogues of worst-case curves over
the tail level and over the ball radius.
"""
from meandev import (
    ESDeviation,
    ExpShortfallWeight,
    Gini,
    LinearWeight,
    MDMeasure,
    MomentUncertainty,
    Normal,
    ParetoShortfallWeight,
    WassersteinUncertainty,
    md_eval,
    md_true,
    worstcase_moment,
    worstcase_wasserstein,
)

print("=" * 72)
print("1. Mean/variance uncertainty: worst case vs the normal model")
print("=" * 72)
print("   (mean 1, standard deviation 1, tail level alpha varies)")
print(f"{'alpha':>6} {'normal value':>14} {'worst case':>12} {'ratio':>7}")
g = ExpShortfallWeight(1.0)
for alpha in (0.90, 0.925, 0.95, 0.975, 0.99):
    h = ESDeviation(alpha)
    nominal = md_true(Normal(1.0, 1.0), MDMeasure(g, h))
    worst = worstcase_moment(g, h, MomentUncertainty(m=1.0, v=1.0, a_order=2.0))
    print(f"{alpha:>6.3f} {nominal:>14.4f} {worst:>12.4f} {worst / nominal:>7.3f}")

print()
print("=" * 72)
print("2. Higher central moments tighten or widen the bound")
print("=" * 72)
h = ESDeviation(0.9)
for order in (1.5, 2.0, 3.0):
    worst = worstcase_moment(LinearWeight(1.0), h, MomentUncertainty(1.0, 1.0, order))
    print(f"  moment order {order:.1f}: worst case {worst:.4f}")

print()
print("=" * 72)
print("3. Wasserstein balls around an empirical baseline")
print("=" * 72)
center = Normal().sample(20_000, 123)
g_log = ParetoShortfallWeight(1.0)  # g(x) = x - log(1 + x)
for h, name in ((ESDeviation(0.9), "tail-average deviation"), (Gini(), "Gini deviation")):
    nominal = md_eval(MDMeasure(g_log, h), center)
    print(f"  {name} (nominal {nominal:.4f})")
    print(f"    {'radius':>8} {'worst case':>12} {'increase':>10}")
    for eps in (0.0, 0.1, 0.25, 0.5, 1.0):
        worst = worstcase_wasserstein(g_log, h, WassersteinUncertainty(center, eps))
        print(f"    {eps:>8.2f} {worst:>12.4f} {worst - nominal:>10.4f}")

print()
print("=" * 72)
print("4. The 1-Lipschitz weighting damps the worst case")
print("=" * 72)
h = ESDeviation(0.9)
u = WassersteinUncertainty(center, 0.5)
for g, label in ((LinearWeight(1.0), "identity weighting"),
                 (ExpShortfallWeight(1.0), "exp_shortfall(1)"),
                 (g_log, "x - log(1+x)")):
    print(f"  {label:<20} worst case {worstcase_wasserstein(g, h, u):.4f}")
