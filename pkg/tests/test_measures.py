import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from meandev.distortion import ESDeviation, Gini, choquet_deviation
from meandev.distributions import Normal, StateVector
from meandev.measures import (
    MDMeasure,
    adjusted_es_identity_gap,
    es_alpha,
    es_alpha_ru,
    expectile,
    md_eval,
    md_value,
    var_alpha,
)
from meandev.riskweight import (
    ExpCapWeight,
    ExpShortfallWeight,
    LinearWeight,
    PiecewiseLinearWeight,
    smallest_coherent_multiplier,
)


def relu_weight() -> PiecewiseLinearWeight:
    """g(x) = (x - 1)+."""
    return PiecewiseLinearWeight(knots=(1.0,), slopes=(0.0, 1.0))


class TestVaR:
    def test_left_quantile_at_atom(self):
        assert var_alpha(StateVector([0.0, 2.0]), 0.5) == 0.0

    def test_order_statistic_index(self):
        assert var_alpha(StateVector([1, 2, 3, 4, 5]), 0.8) == 4.0

    def test_constant(self):
        assert var_alpha(StateVector([3.0] * 6), 0.37) == 3.0

    def test_domain(self):
        with pytest.raises(ValueError):
            var_alpha(StateVector([1.0]), 1.0)


class TestES:
    def test_two_states(self):
        assert es_alpha(StateVector([0.0, 2.0]), 0.5) == 2.0

    def test_alpha_zero_is_mean(self, rng):
        x = StateVector(rng.normal(size=37))
        assert es_alpha(x, 0.0) == pytest.approx(x.mean(), abs=1e-15)

    def test_normal_closed_form(self):
        # phi(Phi^-1(0.9)) / 0.1 for the standard normal
        from scipy.special import ndtri
        z = ndtri(0.9)
        oracle = math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi) / 0.1
        x = Normal().sample(10 ** 5, 99)
        assert es_alpha(x, 0.9) == pytest.approx(oracle, abs=0.02)

    def test_exact_staircase_integral(self, rng):
        # oracle: integrate the staircase quantile on a fine midpoint grid
        x = StateVector(rng.normal(size=23))
        xs = np.sort(x.values)
        for alpha in (0.31, 0.5, 0.77, 0.9):
            m = 2_000_001
            u = alpha + (1.0 - alpha) * (np.arange(m) + 0.5) / m
            q = xs[np.minimum(np.ceil(23 * u).astype(int), 23) - 1]
            assert es_alpha(x, alpha) == pytest.approx(float(np.mean(q)), abs=1e-4)

    def test_dominates_mean(self, rng):
        for _ in range(50):
            x = StateVector(rng.normal(size=int(rng.integers(2, 40))))
            assert es_alpha(x, 0.8) >= x.mean() - 1e-12


class TestESRockafellarUryasev:
    def test_two_states(self):
        value, minimizer = es_alpha_ru(StateVector([0.0, 2.0]), 0.5)
        assert value == 2.0
        assert minimizer == 0.0  # left quantile

    def test_constant(self):
        value, minimizer = es_alpha_ru(StateVector([5.0, 5.0, 5.0]), 0.4)
        assert (value, minimizer) == (5.0, 5.0)

    def test_breakpoint_enumeration(self):
        value, _ = es_alpha_ru(StateVector([1, 2, 3, 4]), 0.75)
        assert value == 4.0

    def test_agrees_with_staircase(self, rng):
        for _ in range(100):
            x = StateVector(rng.normal(size=int(rng.integers(2, 60))))
            alpha = float(rng.uniform(0.05, 0.95))
            value, minimizer = es_alpha_ru(x, alpha)
            assert value == pytest.approx(es_alpha(x, alpha), abs=1e-10)
            assert minimizer == var_alpha(x, alpha)


class TestExpectile:
    def test_half_is_mean(self, rng):
        x = StateVector(rng.normal(size=31))
        assert expectile(x, 0.5) == pytest.approx(x.mean(), abs=1e-9)

    def test_two_point_analytic(self):
        # alpha (1 - x) = (1 - alpha)(x + 1) solves to 2*alpha - 1
        assert expectile(StateVector([-1.0, 1.0]), 0.9) == pytest.approx(0.8, abs=1e-9)

    def test_constant(self):
        assert expectile(StateVector([2.5] * 4), 0.7) == 2.5

    def test_balance_at_root(self, rng):
        x = StateVector(rng.standard_t(4, size=50))
        for alpha in (0.6, 0.9):
            e = expectile(x, alpha)
            v = x.values
            lhs = alpha * np.mean(np.maximum(v - e, 0.0))
            rhs = (1 - alpha) * np.mean(np.maximum(e - v, 0.0))
            assert lhs == pytest.approx(rhs, abs=1e-9)


class TestMDEval:
    def test_counterexample_values(self):
        m = MDMeasure(relu_weight(), ESDeviation(0.5))
        assert md_eval(m, StateVector([0.0, 2.0])) == 1.0
        assert md_eval(m, StateVector([0.0, 4.0])) == 3.0

    def test_subadditivity_violation(self):
        m = MDMeasure(relu_weight(), ESDeviation(0.5))
        md_x = md_eval(m, StateVector([0.0, 2.0]))
        md_sum = md_eval(m, StateVector([0.0, 4.0]))
        assert md_sum == 3.0 and md_x + md_x == 2.0
        assert md_sum > md_x + md_x

    def test_constant(self):
        m = MDMeasure(ExpShortfallWeight(1.0), ESDeviation(0.9))
        assert md_eval(m, StateVector([4.2] * 9)) == 4.2

    @given(c=st.floats(-20.0, 20.0))
    def test_cash_additivity(self, c):
        m = MDMeasure(ExpShortfallWeight(1.0), ESDeviation(0.9))
        x = StateVector([0.4, -1.2, 3.1, 0.0, 2.2])
        assert md_eval(m, x + c) == pytest.approx(md_eval(m, x) + c,
                                                  abs=1e-12 * max(1.0, abs(c)))

    def test_monotone_for_range_normalized(self, rng):
        m = MDMeasure(ExpCapWeight(1.0), ESDeviation(0.9))
        for _ in range(200):
            n = int(rng.integers(2, 30))
            x = StateVector(rng.normal(size=n))
            y = x + StateVector(np.abs(rng.normal(size=n)))
            assert md_eval(m, x) <= md_eval(m, y) + 1e-12

    def test_dominating_coherent_bound(self, rng):
        for g in (LinearWeight(0.7), ExpShortfallWeight(1.0), ExpCapWeight(1.0), relu_weight()):
            m = MDMeasure(g, ESDeviation(0.9))
            mult = smallest_coherent_multiplier(g)
            for _ in range(50):
                x = StateVector(rng.normal(size=20))
                bound = mult * choquet_deviation(m.h, x) + x.mean()
                assert md_eval(m, x) <= bound + 1e-12

    def test_monetary_certification_flag(self):
        assert MDMeasure(LinearWeight(1.0), ESDeviation(0.9)).monetary_certified
        assert MDMeasure(LinearWeight(1.0), Gini()).monetary_certified


class TestAdjustedESIdentity:
    def test_linear_gap_tiny(self):
        x = Normal().sample(20000, 5)
        gap = adjusted_es_identity_gap(LinearWeight(1.0), 0.9, x, grid_size=500)
        assert gap <= 1e-10

    def test_exp_shortfall_gap_small(self):
        x = Normal().sample(20000, 6)
        gap = adjusted_es_identity_gap(ExpShortfallWeight(1.0), 0.9, x, grid_size=800)
        assert gap <= 1e-3

    def test_constant_vector(self):
        x = StateVector([2.0] * 200)
        assert adjusted_es_identity_gap(ExpShortfallWeight(1.0), 0.9, x, 100) <= 1e-12

    def test_piecewise_convex_weight(self):
        x = Normal().sample(20000, 8)
        assert adjusted_es_identity_gap(relu_weight(), 0.9, x, grid_size=500) <= 1e-10

    def test_rejects_nonconvex(self):
        x = StateVector([0.0, 1.0])
        with pytest.raises(ValueError):
            adjusted_es_identity_gap(ExpCapWeight(1.0), 0.9, x)

    def test_rejects_slope_below_one(self):
        x = StateVector([0.0, 1.0])
        with pytest.raises(ValueError):
            adjusted_es_identity_gap(LinearWeight(0.5), 0.9, x)


class TestMdValueHelper:
    def test_matches_md_eval(self, rng):
        x = StateVector(rng.normal(size=12))
        g, h = ExpShortfallWeight(2.0), Gini()
        assert md_value(g, h, x) == md_eval(MDMeasure(g, h), x)
