import math

import numpy as np
import pytest

from mixreg import (
    GmmConfig,
    RngStream,
    lasso_delta,
    lasso_prediction,
    lasso_saddle,
    linf_delta,
    linf_prediction,
    linf_saddle,
    omega_value,
    q_tail,
    ridge_closed_form,
    ridge_prediction,
    st_constants,
    xi_value,
)
from mixreg.errors import (
    CorrelationOutOfRange,
    InvalidCorruption,
    NegativeRadicand,
)
from mixreg.solvers import soft_threshold
from mixreg.theory import lasso_objective, linf_objective

REF = GmmConfig(d=750, n=500, k=5, r=0.8, c=0.3, sigma=1.0, seed=0)


def correlated_pair(gen, m, omega):
    u = gen.standard_normal(m)
    v = gen.standard_normal(m)
    return u, omega * u + math.sqrt(1 - omega * omega) * v


class TestStConstants:
    def test_zero_corruption(self):
        st = st_constants(0.0, 5)
        assert st.s == 0.0 and st.t == 0.0

    def test_binary_case_values(self):
        st = st_constants(0.3, 2)
        base = 2 * 0.3 - 2 * 0.09
        assert st.s == pytest.approx(math.sqrt(2 * base) / 2)
        assert st.t == pytest.approx(-st.s)

    def test_identities_on_grid(self):
        for k in (2, 3, 5, 8, 12):
            for c in (0.0, 0.05, 0.2, 0.3, 0.45):
                st = st_constants(c, k)
                base = 2 * c - k * c * c / (k - 1)
                assert st.s ** 2 + st.t ** 2 == pytest.approx(base,
                                                              abs=1e-12)
                assert 2 * st.s * st.t == pytest.approx(-base / (k - 1),
                                                        abs=1e-12)

    def test_rejects_bad_rate(self):
        with pytest.raises(InvalidCorruption):
            st_constants(0.6, 5)


class TestRidgeClosedForm:
    def test_zero_corruption_kills_extra_directions(self):
        cfg = GmmConfig(d=100, n=80, k=4, r=0.5, c=0.0, sigma=1.0)
        form = ridge_closed_form(cfg, 100.0)
        assert form.alpha == 0.0 and form.beta == 0.0
        assert form.gamma < 0 < form.zeta

    def test_linear_system_residual_on_random_parameters(self):
        gen = RngStream(41, 0).generator()
        for _ in range(25):
            k = int(gen.integers(2, 8))
            cfg = GmmConfig(d=int(gen.integers(20, 2000)),
                            n=int(gen.integers(20, 2000)),
                            k=k,
                            r=float(gen.uniform(-0.9 / (k - 1), 0.95)),
                            c=float(gen.uniform(0.0, 0.45)),
                            sigma=float(gen.uniform(0.3, 2.0)))
            lam = float(10 ** gen.uniform(0, 6))
            f = ridge_closed_form(cfg, lam)
            d, n, k, r, c, sig = (cfg.d, cfg.n, cfg.k, cfg.r, cfg.c,
                                  cfg.sigma)
            v = 1 + k * sig * sig / n
            a11 = ((k - 2) * r + 1 + k * sig * sig / n) * d + f.lambda_tilde
            a22 = d * v + f.lambda_tilde
            r1 = a11 * f.gamma + f.zeta * r * d - c / (k - 1)
            r2 = (k - 1) * r * d * f.gamma + a22 * f.zeta - (1 - c)
            scale = max(abs(c / (k - 1)), abs(1 - c))
            assert abs(r1) <= 1e-10 * scale
            assert abs(r2) <= 1e-10 * scale
            st = st_constants(c, k)
            denom = n * f.lambda_tilde + sig * sig * d * k
            assert f.alpha * denom == pytest.approx(st.s * math.sqrt(n * k),
                                                    rel=1e-12)
            assert f.beta * denom == pytest.approx(st.t * math.sqrt(n * k),
                                                   rel=1e-12)

    def test_reference_large_lambda_prediction_is_tiny(self):
        pred = ridge_prediction(REF, 1e5, mc_samples=100_000)
        assert pred.margin_arg == pytest.approx(8.0658, abs=2e-3)
        assert pred.error <= 0.001


class TestXiOmega:
    def test_zero_gammas(self):
        assert xi_value((0.0, 0.0, 0.0, 0.0), REF) == 0.0

    def test_single_term_reduction(self):
        # only gamma3 active: radicand is (k/n) sigma^2 gamma3^2
        xi = xi_value((0.0, 0.0, 1.0, 0.0), REF)
        expected = (REF.n / REF.k) * math.sqrt(REF.k / REF.n)
        assert xi == pytest.approx(expected, rel=1e-12)

    def test_reference_saddle_is_finite_positive(self):
        sp = lasso_saddle(REF, 50.0)
        assert 0.0 < sp.xi < math.inf
        assert -1.0 < sp.omega < 1.0

    def test_omega_zero_cases(self):
        xi = xi_value((0.0, 0.0, 1.0, 0.0), REF)
        assert omega_value((0.0, 0.0, 1.0, 0.0), REF, xi) == 0.0

    def test_omega_bounded_by_cauchy_schwarz(self):
        gen = RngStream(42, 0).generator()
        for _ in range(200):
            g = gen.standard_normal(4)
            xi = xi_value(g, REF)
            if xi == 0.0:
                continue
            om = omega_value(g, REF, xi)
            assert abs(om) < 1.0

    def test_omega_requires_positive_xi(self):
        with pytest.raises(CorrelationOutOfRange):
            omega_value((0.0, 0.0, 0.0, 0.0), REF, 0.0)


class TestLassoSaddle:
    def test_zero_corruption_zeroes_gamma34(self):
        cfg = GmmConfig(d=750, n=500, k=5, r=0.8, c=0.0, sigma=1.0)
        sp = lasso_saddle(cfg, 50.0)
        assert abs(sp.gamma3) < 1e-6
        assert abs(sp.gamma4) < 1e-6

    def test_reference_compression_rate_near_fifteen_x(self):
        sp = lasso_saddle(REF, 50.0)
        assert 1 / 25 <= sp.big_r <= 1 / 9

    def test_sparsity_collapses_at_huge_lambda(self):
        sp50 = lasso_saddle(REF, 50.0)
        sp6 = lasso_saddle(REF, 1e6)
        assert sp6.big_r < sp50.big_r / 5
        grid = [50.0, 200.0, 1e3, 1e4, 1e6]
        rs = [lasso_saddle(REF, lam).big_r for lam in grid]
        assert all(a >= b for a, b in zip(rs, rs[1:]))

    def test_big_r_is_a_fraction(self):
        for lam in (5.0, 50.0, 500.0):
            sp = lasso_saddle(REF, lam)
            assert 0.0 <= sp.big_r <= 1.0

    def test_objective_unimodal_along_axes(self):
        sp = lasso_saddle(REF, 50.0)
        st = st_constants(REF.c, REF.k)
        g0 = np.array([sp.gamma1, sp.gamma2, sp.gamma3, sp.gamma4])
        for i in range(4):
            ts = np.linspace(-0.5, 0.5, 41)
            vals = []
            for t in ts:
                g = g0.copy()
                g[i] += t
                try:
                    vals.append(lasso_objective(g, REF, 50.0, st))
                except NegativeRadicand:
                    vals.append(-math.inf)
            j = int(np.argmax(vals))
            assert all(vals[a] <= vals[a + 1] + 1e-9 for a in range(j))
            assert all(vals[a] >= vals[a + 1] - 1e-9
                       for a in range(j, len(vals) - 1))


class TestLassoDelta:
    def test_vanishes_when_threshold_dominates(self):
        assert lasso_delta(1.0, 0.2, 40.0) == 0.0

    def test_matches_soft_threshold_mc_oracle(self):
        xi, omega, lam = 2.0, 0.0, 2.0
        val = lasso_delta(xi, omega, lam)
        gen = RngStream(43, 0).generator()
        m = 10_000_000
        g, gp = correlated_pair(gen, m, omega)
        diff = (soft_threshold(xi * g, lam) - soft_threshold(xi * gp, lam)) ** 2
        mean = diff.mean()
        se = diff.std() / math.sqrt(m)
        assert abs(val ** 2 - mean) <= 3 * se

    def test_integrand_swap_symmetry(self):
        # swapping the roles of the two fields (regions mirrored) leaves
        # every term unchanged under the exchangeable joint law
        from mixreg import BivariateRegion, bivariate_gauss_expect

        xi, lam = 1.5, 1.2
        thr = lam / xi
        for om in (-0.5, 0.35, 0.8):
            mixed = bivariate_gauss_expect(
                lambda g, gp: (g - thr) ** 2,
                BivariateRegion(x_lo=thr, y_lo=-thr, y_hi=thr), om)
            swapped = bivariate_gauss_expect(
                lambda g, gp: (gp - thr) ** 2,
                BivariateRegion(x_lo=-thr, x_hi=thr, y_lo=thr), om)
            assert mixed == pytest.approx(swapped, rel=1e-6)
            corner = bivariate_gauss_expect(
                lambda g, gp: (g - gp - 2 * thr) ** 2,
                BivariateRegion(x_lo=thr, y_hi=-thr), om)
            corner_sw = bivariate_gauss_expect(
                lambda g, gp: (gp - g - 2 * thr) ** 2,
                BivariateRegion(x_hi=-thr, y_lo=thr), om)
            assert corner == pytest.approx(corner_sw, rel=1e-6)


class TestLassoPrediction:
    def test_reference_error_small_at_optimum(self):
        pred = lasso_prediction(REF, 50.0, mc_samples=100_000)
        assert pred.error <= 0.05
        assert pred.sparsity_fraction == pytest.approx(0.0469, abs=0.002)

    def test_error_approaches_random_guessing(self):
        pred = lasso_prediction(REF, 1e3, mc_samples=200_000)
        assert abs(pred.error - 0.8) <= 0.03

    def test_margin_positive_at_moderate_lambda(self):
        pred = lasso_prediction(REF, 50.0, mc_samples=10_000)
        assert pred.margin_arg > 0


class TestLinfSaddle:
    def test_zero_corruption_zeroes_gamma34(self):
        cfg = GmmConfig(d=750, n=500, k=5, r=0.8, c=0.0, sigma=1.0)
        sp = linf_saddle(cfg, 1e3)
        assert abs(sp.gamma3) < 1e-6
        assert abs(sp.gamma4) < 1e-6

    def test_zeta_monotone_to_half(self):
        lams = [2e3, 2e4, 2e5]
        zetas = [linf_saddle(REF, lam).big_r / 2 for lam in lams]
        assert all(a < b for a, b in zip(zetas, zetas[1:]))
        assert 0.45 <= zetas[-1] <= 0.5

    def test_inner_maximizer_stationary_at_fixed_delta(self):
        sp = linf_saddle(REF, 1e4)
        st = st_constants(REF.c, REF.k)
        g0 = np.array([sp.gamma1, sp.gamma2, sp.gamma3, sp.gamma4])
        h = 1e-5
        bound = 1e-4 * (1.0 + abs(sp.objective))
        for i in range(4):
            e = np.zeros(4)
            e[i] = h
            deriv = (linf_objective(g0 + e, REF, 1e4, sp.delta_opt, st)
                     - linf_objective(g0 - e, REF, 1e4, sp.delta_opt, st)
                     ) / (2 * h)
            assert abs(deriv) <= bound

    def test_per_side_fraction_bounds(self):
        for lam in (1e2, 1e3, 1e4):
            sp = linf_saddle(REF, lam)
            zeta = sp.big_r / 2
            assert 0.0 <= zeta <= 0.5

    def test_inner_objective_unimodal_along_axes(self):
        lam = 1e4
        sp = linf_saddle(REF, lam)
        st = st_constants(REF.c, REF.k)
        g0 = np.array([sp.gamma1, sp.gamma2, sp.gamma3, sp.gamma4])
        for i in range(4):
            vals = []
            for t in np.linspace(-0.5, 0.5, 41):
                g = g0.copy()
                g[i] += t
                try:
                    vals.append(linf_objective(g, REF, lam, sp.delta_opt,
                                               st))
                except NegativeRadicand:
                    vals.append(-math.inf)
            j = int(np.argmax(vals))
            assert all(vals[a] <= vals[a + 1] + 1e-9 for a in range(j))
            assert all(vals[a] >= vals[a + 1] - 1e-9
                       for a in range(j, len(vals) - 1))


class TestLinfDelta:
    def test_degenerate_box_is_zero(self):
        assert linf_delta(2.0, 0.3, 10.0, 0.0, 500.0) == 0.0

    def test_matches_clip_mc_oracle(self):
        xi, omega, lam, delta, rho = 3.0, 0.25, 10.0, 8.0, 500.0
        val = linf_delta(xi, omega, lam, delta, rho)
        gen = RngStream(44, 0).generator()
        m = 10_000_000
        g, gp = correlated_pair(gen, m, omega)
        clamp = delta / lam
        a = np.clip(xi * g / (2 * rho), -clamp, clamp)
        b = np.clip(xi * gp / (2 * rho), -clamp, clamp)
        diff = (a - b) ** 2
        mean = diff.mean()
        se = diff.std() / math.sqrt(m)
        assert abs(val ** 2 - mean) <= 3 * se

    def test_large_box_equals_unclipped_difference(self):
        # threshold far out: the clip never binds and the gap is the
        # plain difference of the two scaled fields
        xi, omega, rho = 2.0, 0.4, 100.0
        lam, delta = 1.0, 1e4
        val = linf_delta(xi, omega, lam, delta, rho)
        expected = math.sqrt((xi / (2 * rho)) ** 2 * 2 * (1 - omega))
        assert val == pytest.approx(expected, rel=1e-5)


class TestLinfPrediction:
    def test_error_small_at_large_lambda(self):
        pred = linf_prediction(REF, 2e4, mc_samples=100_000)
        assert pred.error <= 0.01
        assert pred.boundary_fraction >= 0.95

    def test_no_late_lambda_blowup(self):
        hi = linf_prediction(REF, 2e4, mc_samples=100_000)
        lo = linf_prediction(REF, 2e3, mc_samples=100_000)
        assert hi.error <= lo.error + 0.02
