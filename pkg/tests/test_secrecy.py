import math

import numpy as np
import pytest
from scipy import integrate, stats

import secalign as sa
from secalign.linalg import random_orthonormal
from secalign.secrecy import EveFilters, sample_eve_components, with_theta

from conftest import config_with_da


@pytest.fixture(scope="module")
def meb_filters(bench_config):
    """Converged filters on the da=4 benchmark; the sampler's precondition."""
    config = config_with_da(bench_config, 4)
    channels = sa.generate_channels(config, seed=0)
    sol = sa.meb_ia_solve(
        channels, config, sa.SolverSettings(max_iterations=6000, convergence_tol=1e-11), seed=0
    )
    assert sol.leakage < 1e-6
    return sol


def _model(Pa=100.0, Pk=(100.0,) * 4, theta=0.5, da=4, dk=(2,) * 4, L=16, eps=0.1,
           sigma2=16.0, Rb=None):
    return sa.SecrecyModel(
        power=sa.PowerProfile(Pa=Pa, Pk=tuple(Pk), theta=theta),
        alpha_a=da, alpha_k=tuple(dk), L=L, eps_th=eps, sigma2=sigma2, Rb=Rb,
    )


class TestModelValidation:
    def test_theta_bounds(self):
        with pytest.raises(ValueError):
            sa.PowerProfile(Pa=1.0, Pk=(), theta=1.5)

    def test_positive_powers(self):
        with pytest.raises(ValueError):
            sa.PowerProfile(Pa=0.0, Pk=(), theta=0.5)

    def test_eps_open_interval(self):
        with pytest.raises(ValueError):
            _model(eps=1.0)

    def test_mu_requires_rb(self):
        with pytest.raises(ValueError, match="Rb"):
            _model().mu(1.0)

    def test_negative_redundancy_rejected(self):
        with pytest.raises(ValueError, match="redundancy"):
            sa.sop_closed_form(_model(Rb=2.0), Rs=3.0)

    def test_endpoint_rates_guarded(self):
        m = _model(theta=1.0)
        with pytest.raises(ValueError):
            m.lambda_a()
        with pytest.raises(ValueError):
            with_theta(m, 0.0).lam()


class TestSolveW:
    def test_k_zero_full_power_is_linear(self):
        """No noise term and no interferers: the budget equation is w / Pa."""
        m = _model(Pk=(), dk=(), theta=1.0, Pa=50.0, L=4, eps=0.2)
        assert sa.solve_w(1.0, m) == pytest.approx(m.c * 50.0, rel=1e-10)

    def test_w_increasing_and_residual(self, canonical_model):
        m = canonical_model
        thetas = np.linspace(0.0, 1.0, 50)
        ws = [sa.solve_w(t, m) for t in thetas]
        assert all(b > a for a, b in zip(ws, ws[1:]))
        # explicit residual check at a few points
        for t, w in zip(thetas[::7], ws[::7]):
            lhs = w / m.Pa + m.alpha_a * math.log1p((1 - t) * w / m.alpha_a)
            lhs += sum(a * math.log1p(w / g) for a, g in zip(m.alpha_k, m.g_k))
            assert abs(lhs - m.c) < 1e-11 * m.c

    def test_noise_weighted_w_decreasing(self, canonical_model):
        thetas = np.linspace(0.0, 1.0, 50)
        vals = [(1 - t) * sa.solve_w(t, canonical_model) for t in thetas]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_theta_domain(self, canonical_model):
        with pytest.raises(ValueError):
            sa.solve_w(-0.1, canonical_model)


class TestWPrime:
    def test_matches_finite_differences(self, canonical_model):
        h = 1e-6
        for t in np.linspace(0.05, 0.95, 19):
            w = sa.solve_w(t, canonical_model)
            analytic = sa.w_prime(t, w, canonical_model)
            fd = (sa.solve_w(t + h, canonical_model) - sa.solve_w(t - h, canonical_model)) / (2 * h)
            assert abs(fd - analytic) / abs(analytic) < 1e-5

    def test_log_derivative_increasing(self, canonical_model):
        thetas = np.linspace(0.01, 1.0, 60)
        ratios = []
        for t in thetas:
            w = sa.solve_w(t, canonical_model)
            ratios.append(sa.w_prime(t, w, canonical_model) / w)
        assert all(b > a - 1e-12 for a, b in zip(ratios, ratios[1:]))

    def test_k_zero_bracket_has_no_sum(self):
        m = _model(Pk=(), dk=(), theta=0.5)
        w = sa.solve_w(0.5, m)
        expected = (m.alpha_a * w / (m.alpha_a + 0.5 * w)) / (
            1 / m.Pa + 0.5 * m.alpha_a / (m.alpha_a + 0.5 * w)
        )
        assert sa.w_prime(0.5, w, m) == pytest.approx(expected, rel=1e-12)


class TestSecrecyRate:
    def test_zero_when_gains_match(self, canonical_model):
        w_half = sa.solve_w(0.5, canonical_model)
        matched = _model(sigma2=w_half / canonical_model.Pa)
        assert sa.rs_of_theta(0.5, matched) == pytest.approx(0.0, abs=1e-12)

    def test_prime_matches_finite_differences(self, canonical_model):
        h = 1e-6
        for t in np.linspace(0.05, 0.95, 19):
            analytic = sa.rs_prime(t, canonical_model)
            fd = (sa.rs_of_theta(t + h, canonical_model) - sa.rs_of_theta(t - h, canonical_model)) / (2 * h)
            assert abs(fd - analytic) / max(abs(analytic), 1e-6) < 1e-5

    def test_prime_strictly_decreasing(self, canonical_model):
        thetas = np.linspace(0.005, 1.0, 100)
        primes = [sa.rs_prime(t, canonical_model) for t in thetas]
        assert all(b < a + 1e-12 for a, b in zip(primes, primes[1:]))

    def test_limit_at_zero(self, canonical_model):
        assert sa.rs_of_theta(0.0, canonical_model) == 0.0
        expected = (canonical_model.gamma_B - sa.positive_rate_threshold(canonical_model)) / math.log(2)
        assert sa.rs_prime(0.0, canonical_model) == pytest.approx(expected, rel=1e-10)


class TestClosedFormSop:
    def test_zero_redundancy_always_leaks(self):
        m = _model(Rb=3.0)
        assert sa.sop_closed_form(m, Rs=3.0) == 1.0

    def test_infinite_redundancy_never_leaks(self):
        m = _model(Rb=3.0)
        assert sa.sop_closed_form(m, Rs=-60.0) < 1e-12

    def test_monotone_in_rs(self):
        m = _model(Rb=6.0, Pk=(1.0,) * 4)
        values = [sa.sop_closed_form(m, rs) for rs in np.linspace(0.0, 6.0, 40)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_full_power_drops_noise_factor(self):
        m = _model(theta=1.0, Rb=4.0)
        lam_mu = m.mu(2.0) / (1.0 * m.Pa)
        expected = math.exp(-lam_mu)
        for a, lk in zip(m.alpha_k, m.lambda_k):
            expected *= (lk / (lk + lam_mu)) ** a
        assert sa.eve_sinr_ccdf(m, m.mu(2.0)) == pytest.approx(expected, rel=1e-12)


class TestLaplaceIdentity:
    """The closed tail must equal the direct transform integral."""

    @staticmethod
    def _quad_ccdf(model, r):
        lam = model.lam()
        s = lam * r
        alpha_a, lam_a = model.alpha_a, model.lambda_a()
        if model.alpha_k:
            y = stats.gamma(a=alpha_a, scale=1.0 / lam_a)
            z = stats.gamma(a=model.alpha_k[0], scale=1.0 / model.lambda_k[0])

            def cdf_t(t):
                val, _ = integrate.quad(lambda u: y.pdf(u) * z.cdf(t - u), 0.0, t, limit=200)
                return val
        else:
            cdf_t = stats.gamma(a=alpha_a, scale=1.0 / lam_a).cdf
        integral, _ = integrate.quad(
            lambda t: cdf_t(t) * math.exp(-s * t), 0.0, np.inf, limit=200
        )
        return s * math.exp(-s) * integral  # (lam r) e^{-lam r} L[F_T](lam r)

    def test_no_interferers(self):
        m = _model(Pk=(), dk=(), theta=0.6, Pa=20.0)
        for r in (0.5, 2.0, 8.0):
            assert sa.eve_sinr_ccdf(m, r) == pytest.approx(self._quad_ccdf(m, r), abs=1e-6)

    def test_one_interferer(self):
        m = _model(Pk=(30.0,), dk=(2,), theta=0.6, Pa=20.0, da=3)
        for r in (0.5, 2.0):
            assert sa.eve_sinr_ccdf(m, r) == pytest.approx(self._quad_ccdf(m, r), abs=1e-6)


class TestComponentDistributions:
    """The sampled projections follow the gamma/exponential laws."""

    def test_kolmogorov_smirnov(self, meb_filters):
        n = 100_000
        comps = sample_eve_components(meb_filters, n, seed=11)
        m = _model(theta=0.4)
        x = m.theta * m.Pa * comps.x
        y = (1 - m.theta) * m.Pa / m.alpha_a * comps.y
        z0 = m.Pk[0] / m.alpha_k[0] * comps.z[:, 0]
        ks_x = stats.kstest(x, stats.expon(scale=1.0 / m.lam()).cdf).statistic
        ks_y = stats.kstest(y, stats.gamma(a=m.alpha_a, scale=1.0 / m.lambda_a()).cdf).statistic
        ks_z = stats.kstest(z0, stats.gamma(a=m.alpha_k[0], scale=1.0 / m.lambda_k[0]).cdf).statistic
        assert ks_x < 0.01
        assert ks_y < 0.01
        assert ks_z < 0.01


class TestEveSinrSample:
    def test_theta_zero_is_silent(self, meb_filters):
        m = _model(theta=0.0)
        h_ea = np.ones(12, dtype=complex)
        h_ek = [np.ones(9, dtype=complex)] * 4
        assert sa.sinr_eve_sample(m, h_ea, h_ek, meb_filters) == 0.0

    def test_matches_manual_formula(self, meb_filters):
        rng = np.random.default_rng(5)
        m = _model(theta=0.3)
        h_ea = (rng.standard_normal(12) + 1j * rng.standard_normal(12)) * np.sqrt(0.5)
        h_ek = [(rng.standard_normal(9) + 1j * rng.standard_normal(9)) * np.sqrt(0.5) for _ in range(4)]
        num = 0.3 * 100 * abs(np.vdot(meb_filters.va, h_ea).conj()) ** 2
        den = 1.0 + 0.7 * 100 / 4 * np.linalg.norm(h_ea.conj() @ meb_filters.Wa) ** 2
        for hk, vk in zip(h_ek, meb_filters.Vk):
            den += 100 / 2 * np.linalg.norm(hk.conj() @ vk) ** 2
        assert sa.sinr_eve_sample(m, h_ea, h_ek, meb_filters) == pytest.approx(num / den, rel=1e-12)

    def test_k_zero_full_power_exponential_mean(self):
        """Beam-only transmission: the tap is exponential with mean Pa."""
        rng = np.random.default_rng(9)
        q = random_orthonormal(rng, 6, 2)
        filters = EveFilters(va=q[:, 0], Wa=q[:, 1:], Vk=())
        m = _model(Pa=25.0, Pk=(), dk=(), da=1, theta=1.0)
        comps = sample_eve_components(filters, 100_000, seed=3)
        gammas = 1.0 * 25.0 * comps.x
        assert abs(np.mean(gammas) - 25.0) / 25.0 < 0.02

    def test_empirical_ccdf_matches_closed_form(self, meb_filters):
        m = _model(theta=0.5, Pk=(1.0,) * 4)
        n = 400_000
        comps = sample_eve_components(meb_filters, n, seed=21)
        den = 1.0 + (1 - 0.5) * 100 / 4 * comps.y
        for k in range(4):
            den += 1.0 / 2 * comps.z[:, k]
        gam = 0.5 * 100 * comps.x / den
        p_hat = np.mean(gam > 1.0)
        p = sa.eve_sinr_ccdf(m, 1.0)
        se = math.sqrt(p * (1 - p) / n)
        assert abs(p_hat - p) < 3 * se


class TestMonteCarloSop:
    def test_refuses_tiny_sample_count(self, meb_filters):
        with pytest.raises(ValueError, match="n_samples"):
            sa.sop_monte_carlo(_model(Rb=4.0), meb_filters, 1.0, 50, seed=0)

    def test_zero_threshold_is_certain_outage(self, meb_filters):
        m = _model(Rb=4.0)
        result = sa.sop_monte_carlo(m, meb_filters, 4.0, 1000, seed=0)
        assert result.estimate == 1.0

    def test_agrees_with_closed_form(self, meb_filters):
        m = _model(Rb=4.0, Pk=(1.0,) * 4, theta=0.5)
        closed = sa.sop_closed_form(m, 2.5)
        mc = sa.sop_monte_carlo(m, meb_filters, 2.5, 200_000, seed=17)
        assert abs(closed - mc.estimate) < 3 * mc.stderr + 3.0 / mc.n_samples

    def test_deep_tail_benchmark_point(self, meb_filters):
        """Strong redundancy: the tail is ~1e-8 and the estimator can only
        bound it, so the comparison uses the zero-hit confidence width."""
        m = _model(Rb=4.0, theta=0.5)
        closed = sa.sop_closed_form(m, 1.0)  # redundancy 3 bpcu
        assert closed < 1e-7
        mc = sa.sop_monte_carlo(m, meb_filters, 1.0, 1_000_000, seed=2)
        assert abs(closed - mc.estimate) < 3 * mc.stderr + 3.0 / mc.n_samples

    def test_all_eves_path_matches_exponentiation(self, meb_filters):
        m = _model(Rb=4.0, Pk=(1.0,) * 4, theta=0.5, L=16)
        rs = 2.5
        slow = sa.sop_monte_carlo(m, meb_filters, rs, 150_000, seed=5, all_eves=True)
        single = sa.sop_monte_carlo(with_theta(_model(Rb=4.0, Pk=(1.0,) * 4, L=1), 0.5),
                                    meb_filters, rs, 150_000, seed=6)
        combined = 1.0 - (1.0 - single.estimate) ** 16
        tol = 3 * math.sqrt(slow.stderr**2 + (16 * (1 - single.estimate) ** 15 * single.stderr) ** 2)
        assert abs(slow.estimate - combined) < tol
        closed = sa.sop_closed_form(m, rs)
        assert abs(slow.estimate - closed) < 3 * slow.stderr + 3.0 / slow.n_samples

    def test_sample_cache_rejected_for_all_eves(self, meb_filters):
        comps = sample_eve_components(meb_filters, 1000, seed=1)
        with pytest.raises(ValueError):
            sa.sop_monte_carlo(_model(Rb=4.0), meb_filters, 2.0, 1000, seed=1,
                               samples=comps, all_eves=True)


class TestPositiveRateThreshold:
    def test_suspends_below_threshold(self):
        base = _model(theta=1.0)
        w0 = sa.positive_rate_threshold(base)
        starved = _model(sigma2=0.5 * w0 / base.Pa)
        sol = sa.srm_solve(starved)
        assert sol.branch is sa.SrmBranch.SUSPEND
        assert sol.theta_star == 0.0
        assert sol.Rs_star == 0.0

    def test_threshold_rises_as_outage_budget_tightens(self):
        eps_grid = (0.3, 0.2, 0.1, 0.05, 0.02)
        thresholds = [sa.positive_rate_threshold(_model(eps=e)) for e in eps_grid]
        assert all(b > a for a, b in zip(thresholds, thresholds[1:]))

    def test_positive_rate_exactly_above_threshold(self):
        """Rs* > 0 iff gamma_B exceeds w(0+), checked just on both sides."""
        base = _model(Pk=(), dk=(), theta=1.0)
        w0 = sa.positive_rate_threshold(base)
        above = sa.srm_solve(_model(Pk=(), dk=(), sigma2=1.05 * w0 / base.Pa))
        below = sa.srm_solve(_model(Pk=(), dk=(), sigma2=0.95 * w0 / base.Pa))
        assert above.Rs_star > 0
        assert above.branch is not sa.SrmBranch.SUSPEND
        assert below.Rs_star == 0.0
        assert below.branch is sa.SrmBranch.SUSPEND


class TestSrmSolve:
    def test_full_power_under_strong_interference(self):
        m = _model(Pa=0.5, Pk=(10_000.0,) * 4)
        sol = sa.srm_solve(m)
        assert sol.branch is sa.SrmBranch.FULL_POWER
        assert sol.theta_star == 1.0
        assert sol.Rs_star > 0

    def test_interior_stationarity(self):
        m = _model(Pa=1e4, Pk=(100.0,) * 4)
        sol = sa.srm_solve(m)
        assert sol.branch is sa.SrmBranch.INTERIOR
        assert abs(sa.rs_prime(sol.theta_star, m)) < 1e-9
        # outage equality holds at (theta*, w*)
        lhs = sol.w_star / m.Pa + m.alpha_a * math.log1p((1 - sol.theta_star) * sol.w_star / m.alpha_a)
        lhs += sum(a * math.log1p(sol.w_star / g) for a, g in zip(m.alpha_k, m.g_k))
        assert abs(lhs - m.c) < 1e-10 * m.c

    def test_matches_grid_search(self):
        m = _model(Pa=1e4, Pk=(100.0,) * 4)
        sol = sa.srm_solve(m)
        grid = np.linspace(0.0, 1.0, 10_001)
        rates = np.array([max(sa.rs_of_theta(t, m), 0.0) for t in grid])
        assert abs(sol.theta_star - grid[np.argmax(rates)]) < 1e-3

    def test_rb_is_never_needed(self):
        assert _model().Rb is None
        sa.srm_solve(_model())  # must not raise


class TestThetaHighSnr:
    def test_exact_unit_case(self):
        # alpha_a = 1, L = 1, eps = 1/2: bracket is exactly 2, theta* = 1/2
        m = _model(da=1, L=1, eps=0.5)
        assert sa.theta_high_snr(m) == pytest.approx(0.5, abs=1e-15)

    def test_stationarity_identity(self):
        """The approximation satisfies its defining fixed-point relation."""
        m = _model(da=4, L=16, eps=0.1)
        t = sa.theta_high_snr(m)
        b = 1.0 - 0.9 ** (1.0 / 16.0)
        lhs = 4.0 * (t / (1.0 - t)) ** 2 * (b ** (-0.25) - 1.0)
        assert lhs == pytest.approx(1.0, rel=1e-12)
        assert abs(t - 0.240) < 5e-4  # independent calculator value

    def test_high_power_split_converges(self):
        m = _model(Pa=1e6, Pk=(100.0,) * 4)
        sol = sa.srm_solve(m)
        assert sol.branch is sa.SrmBranch.INTERIOR
        assert abs(sol.theta_star - sa.theta_high_snr(m)) < 0.02


class TestIsotropic:
    def test_theta_value(self):
        assert sa.isotropic_theta(4) == pytest.approx(0.2)

    def test_never_beats_optimum(self):
        for pa_db in (5.0, 15.0, 25.0, 35.0):
            pa = 10 ** (pa_db / 10)
            m = _model(Pa=pa, Pk=(pa,) * 4, theta=1.0)
            sol = sa.srm_solve(m)
            rs_iso = max(sa.rs_of_theta(0.2, with_theta(m, 0.2)), 0.0)
            assert sol.Rs_star >= rs_iso - 1e-12
