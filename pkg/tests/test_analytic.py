import math

import numpy as np
import pytest

from fdnoma import analytic, montecarlo
from fdnoma.analytic import (
    NonConvergedError,
    cdf_gamma1_max_u1,
    cdf_gamma1_max_u2,
    cdf_gamma2_max_u1,
    cdf_gamma2_max_u2,
    exp_int_ei,
    outage_u1_max_u1,
    outage_u1_max_u2,
    outage_u2_max_u1,
    outage_u2_max_u2,
    rate_from_cdf,
    rate_u1_max_u1,
    rate_u1_max_u2,
    rate_u2_max_u1,
    rate_u2_max_u2,
    sinr_cap,
    thresholds,
    zeta,
)

from conftest import make_params


class TestExponentialIntegral:
    def test_frozen_value_at_minus_one(self):
        # oracle: 40-digit quadrature of the defining integral
        assert exp_int_ei(-1.0) == pytest.approx(-0.21938393439552027, rel=1e-13)

    def test_decays_to_zero_from_below(self):
        value = exp_int_ei(-50.0)
        assert -1e-20 < value < 0.0

    def test_derivative_identity(self):
        # d/dx Ei(x) = exp(x)/x, central finite difference at x = -2
        x, h = -2.0, 1e-4
        numerical = (exp_int_ei(x + h) - exp_int_ei(x - h)) / (2.0 * h)
        assert numerical == pytest.approx(math.exp(x) / x, rel=1e-6)

    @pytest.mark.parametrize("x", [0.0, 1.0, 1e-9])
    def test_domain_error(self, x):
        with pytest.raises(ValueError):
            exp_int_ei(x)

    def test_against_quadrature_oracle(self):
        # Ei(-t) = -integral_t^inf exp(-u)/u du
        import mpmath as mp

        mp.mp.dps = 30
        rng = np.random.default_rng(8)
        for t in rng.uniform(0.01, 40.0, size=12):
            oracle = -float(mp.quad(lambda u: mp.e ** (-u) / u, [t, mp.inf]))
            assert exp_int_ei(-float(t)) == pytest.approx(oracle, rel=1e-12)

    def test_series_and_fraction_agree_at_crossover(self):
        left = exp_int_ei(-0.9999999)
        right = exp_int_ei(-1.0000001)
        assert left == pytest.approx(right, rel=1e-6)  # continuity across the switch
        for t in (0.999999, 1.000001):
            import mpmath as mp

            mp.mp.dps = 30
            assert exp_int_ei(-t) == pytest.approx(float(mp.ei(-t)), rel=1e-13)


def test_alternating_binomial_identity():
    # M * sum_p (-1)^p C(M-1, p) / (p+1) = 1 for the antenna orders in range
    for m in range(1, 17):
        total = m * math.fsum((-1.0) ** p * math.comb(m - 1, p) / (p + 1) for p in range(m))
        assert abs(total - 1.0) <= 1e-12, f"order {m}"


class TestRateFromCdf:
    def test_degenerate_at_zero(self):
        result = rate_from_cdf(lambda x: 1.0, upper=math.inf)
        assert result.value == 0.0

    def test_unit_mean_exponential(self):
        # (1/ln 2) e E1(1), frozen from a 40-digit oracle
        result = rate_from_cdf(lambda x: -math.expm1(-x), upper=math.inf)
        assert result.value == pytest.approx(0.86034738227088595, rel=1e-9)
        assert result.abs_error_bound <= max(1e-9, 1e-8 * result.value)
        assert result.evaluations > 0

    def test_closed_form_agreement(self, baseline):
        quadrature = rate_from_cdf(lambda x: cdf_gamma1_max_u1(x, baseline))
        assert rate_u1_max_u1(baseline) == pytest.approx(quadrature.value, rel=1e-8)

    def test_non_converged_reported(self):
        # a cdf quadrature cannot resolve with a one-interval budget
        wiggly = lambda x: min(1.0, (math.sin(37.0 * x) + 1.0) / 2.0 * min(x, 1.0))
        with pytest.raises(NonConvergedError):
            rate_from_cdf(wiggly, upper=10.0, rel_tol=1e-12, abs_tol=1e-13, limit=1)


PARAM_GRID = [
    make_params(),
    make_params(m_b=1, m_r=1, m_t=1),
    make_params(m_b=2, m_r=3, m_t=4, rho_s=10.0, rho_r=1000.0),
    make_params(k1=1.0, var_ru1=0.5),
    make_params(rho_s=1.0, rho_r=1.0),
    make_params(rho_s=31622.7766, rho_r=31622.7766),  # 45 dB
    make_params(var_br=0.2, var_bu1=3.0, var_ru2=0.7, var_si=1.5),
]


@pytest.mark.parametrize("params", PARAM_GRID)
def test_near_user_closed_forms_match_quadrature(params):
    for closed, cdf in (
        (rate_u1_max_u1, cdf_gamma1_max_u1),
        (rate_u1_max_u2, cdf_gamma1_max_u2),
    ):
        quadrature = rate_from_cdf(lambda x: cdf(x, params), rel_tol=1e-10, abs_tol=1e-12)
        assert closed(params) == pytest.approx(quadrature.value, rel=1e-8)


def test_near_singular_configuration():
    # interference mean within 1e-5 of a1 * direct mean trips the kernel
    # close to its removable singularity
    params = make_params(m_t=1, k1=0.2500025, var_ru1=1.0, rho_s=100.0, rho_r=100.0)
    for closed, cdf in (
        (rate_u1_max_u1, cdf_gamma1_max_u1),
        (rate_u1_max_u2, cdf_gamma1_max_u2),
    ):
        quadrature = rate_from_cdf(lambda x: cdf(x, params), rel_tol=1e-10, abs_tol=1e-12)
        assert closed(params) == pytest.approx(quadrature.value, rel=1e-8)


def test_exactly_singular_configuration_falls_back():
    params = make_params(m_b=1, m_t=1, k1=0.25, var_ru1=1.0)
    quadrature = rate_from_cdf(lambda x: cdf_gamma1_max_u1(x, params), rel_tol=1e-10, abs_tol=1e-12)
    assert rate_u1_max_u1(params) == pytest.approx(quadrature.value, rel=1e-8)


class TestNearUserCdfs:
    def test_zero_at_origin(self, baseline):
        assert cdf_gamma1_max_u1(0.0, baseline) == 0.0
        assert cdf_gamma1_max_u2(0.0, baseline) == 0.0

    def test_tends_to_one(self, baseline):
        big = 1e9
        assert cdf_gamma1_max_u1(big, baseline) == pytest.approx(1.0, abs=1e-12)
        assert cdf_gamma1_max_u2(big, baseline) == pytest.approx(1.0, abs=1e-12)

    def test_single_antenna_reduction(self):
        from fdnoma.config import mean_gains

        params = make_params(m_b=1, m_r=1, m_t=1)
        gains = mean_gains(params)
        x = 1.0
        scale = params.a1 * gains.lam_su1
        expected = 1.0 - math.exp(-x / scale) / (1.0 + gains.lam_ru1 * x / scale)
        assert cdf_gamma1_max_u1(x, params) == pytest.approx(expected, rel=1e-14)
        # single-antenna selection has no gain, so both schemes coincide
        assert cdf_gamma1_max_u2(x, params) == pytest.approx(expected, rel=1e-14)

    def test_against_simulation(self, baseline):
        from fdnoma.channel import draw_batch
        from fdnoma.selection import select_batch
        from fdnoma.sinr import near_sinr

        n = 400_000
        batch = draw_batch(baseline, (1234, 0), n)
        ii, jj, kk = select_batch("max_u1_analytic", batch, baseline)
        rows = np.arange(n)
        gamma1 = near_sinr(batch.g_su1[rows, ii], batch.g_ru1[rows, kk], baseline.a1)
        for x in (1.0, 5.0, 20.0):
            target = cdf_gamma1_max_u1(x, baseline)
            se = math.sqrt(target * (1.0 - target) / n)
            empirical = float(np.mean(gamma1 <= x))
            assert abs(empirical - target) < 4.0 * se + 1e-9, f"x={x}"


class TestFarUserCdfs:
    def test_zero_at_origin(self, baseline):
        assert cdf_gamma2_max_u1(0.0, baseline) == 0.0
        assert cdf_gamma2_max_u2(0.0, baseline) == 0.0

    def test_one_at_the_cap(self, baseline):
        cap = sinr_cap(baseline)
        assert cdf_gamma2_max_u1(cap, baseline) == 1.0
        assert cdf_gamma2_max_u2(cap, baseline) == 1.0
        assert cdf_gamma2_max_u1(cap + 1.0, baseline) == 1.0

    def test_single_antenna_schemes_coincide(self):
        params = make_params(m_b=1, m_r=1, m_t=1)
        for x in (0.1, 0.5, 1.0, 2.0, 2.9):
            assert cdf_gamma2_max_u1(x, params) == pytest.approx(
                cdf_gamma2_max_u2(x, params), rel=1e-12
            )

    def test_monotone_on_grid(self, baseline):
        cap = sinr_cap(baseline)
        grid = np.linspace(0.0, cap, 1000)
        values = [cdf_gamma2_max_u1(float(x), baseline) for x in grid]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))

    def test_against_simulation(self, baseline):
        from fdnoma.channel import draw_batch
        from fdnoma.selection import select_batch
        from fdnoma.sinr import cross_sinr, relay_sinr

        n = 400_000
        batch = draw_batch(baseline, (4321, 0), n)
        rows = np.arange(n)
        for scheme, cdf in (
            ("max_u1_analytic", cdf_gamma2_max_u1),
            ("max_u2_decoupled", cdf_gamma2_max_u2),
        ):
            ii, jj, kk = select_batch(scheme, batch, baseline)
            g12 = cross_sinr(batch.g_su1[rows, ii], batch.g_ru1[rows, kk], baseline.a1, baseline.a2)
            gr = relay_sinr(batch.g_br[rows, ii, jj], batch.g_si[rows, jj, kk], baseline.a1, baseline.a2)
            gamma2 = np.minimum(np.minimum(g12, gr), batch.g_ru2[rows, kk])
            x = 0.5
            target = cdf(x, baseline)
            se = math.sqrt(target * (1.0 - target) / n)
            empirical = float(np.mean(gamma2 <= x))
            assert abs(empirical - target) < 4.0 * se, scheme


class TestFarUserRates:
    def test_below_power_ratio_cap(self, baseline):
        assert rate_u2_max_u1(baseline).value < 2.0
        assert rate_u2_max_u2(baseline).value < 2.0

    def test_internal_consistency(self, baseline):
        direct = rate_u2_max_u1(baseline)
        rebuilt = rate_from_cdf(lambda x: cdf_gamma2_max_u1(x, baseline), upper=sinr_cap(baseline))
        assert direct.value == pytest.approx(rebuilt.value, rel=1e-10)

    def test_vanishing_source_power(self):
        params = make_params(var_bu1=1e-12)
        assert rate_u1_max_u1(params) < 1e-9
        assert rate_u1_max_u2(params) < 1e-9


def test_near_user_rate_under_far_scheme_equals_random_selection(baseline):
    # no selection gain reaches the near user in either case
    r1_analytic = rate_u1_max_u2(baseline)
    rate_u1, _, _ = montecarlo.estimate_rates(baseline, "random", 150_000, seed=5)
    assert abs(rate_u1.value - r1_analytic) < 3.0 * rate_u1.std_error


class TestZeta:
    def test_baseline_value(self, baseline):
        # theta = sqrt(2) - 1 for half-bit targets; the own-signal branch
        # dominates: zeta = 4 (sqrt(2) - 1)
        assert zeta(baseline) == pytest.approx(1.6568542494923802, rel=1e-14)
        theta1, theta2 = thresholds(baseline)
        assert theta1 == pytest.approx(math.sqrt(2.0) - 1.0, rel=1e-14)
        assert theta2 == theta1

    def test_vanishing_targets(self):
        params = make_params(rate1=1e-9, rate2=1e-9)
        assert zeta(params) < 1e-8

    def test_infeasible_far_target(self):
        params = make_params(rate2=2.0)  # threshold 3 = a2/a1
        assert math.isinf(zeta(params))


class TestOutage:
    def test_vanishing_targets_vanishing_outage(self):
        params = make_params(rate1=1e-9, rate2=1e-9)
        assert outage_u1_max_u1(params) < 1e-6
        assert outage_u1_max_u2(params) < 1e-6
        assert outage_u2_max_u1(params) < 1e-6
        assert outage_u2_max_u2(params) < 1e-6

    def test_near_user_outage_is_cdf_at_scaled_threshold(self, baseline):
        z = zeta(baseline)
        assert outage_u1_max_u1(baseline) == cdf_gamma1_max_u1(baseline.a1 * z, baseline)
        assert outage_u1_max_u2(baseline) == cdf_gamma1_max_u2(baseline.a1 * z, baseline)

    def test_infeasible_threshold_certain_outage(self):
        params = make_params(rate2=2.0)
        assert outage_u1_max_u1(params) == 1.0
        assert outage_u1_max_u2(params) == 1.0
        assert outage_u2_max_u1(params) == 1.0
        assert outage_u2_max_u2(params) == 1.0

    def test_single_antenna_schemes_coincide(self):
        params = make_params(m_b=1, m_r=1, m_t=1)
        assert outage_u2_max_u1(params) == pytest.approx(outage_u2_max_u2(params), rel=1e-12)

    def test_probabilities_in_unit_interval(self):
        for db in (0.0, 10.0, 20.0, 40.0, 60.0):
            from fdnoma.config import default_params

            params = default_params(db)
            for fn in (outage_u1_max_u1, outage_u1_max_u2, outage_u2_max_u1, outage_u2_max_u2):
                value = fn(params)
                assert 0.0 <= value <= 1.0


def test_large_antenna_count_warns():
    params = make_params(m_b=17, m_r=4, m_t=4)
    with pytest.warns(RuntimeWarning, match="alternating binomial"):
        cdf_gamma1_max_u1(1.0, params)
