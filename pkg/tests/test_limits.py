import math

import numpy as np
import pytest
from scipy.stats import norm

from modspin import limits as lim
from modspin import modgauss as mg
from modspin import spin_models as sm
from modspin.numerics import QuadratureConfig, integrate_line


@pytest.fixture(scope="module")
def kernel():
    return lim.build_kernel(1.0)


class TestSmoothingKernel:
    def test_normalization(self, kernel):
        assert kernel.rho_total_mass == pytest.approx(1.0, abs=1e-8)

    def test_star_square_integral(self, kernel):
        assert kernel.rho_star_sq_integral == pytest.approx(0.01059,
                                                            abs=1e-4)

    def test_recomputed_constants(self, kernel):
        report = lim.kernel_constants_report(kernel)
        assert report["sup_k2_rho_star"] <= 1.0166
        assert report["sup_k4_rho"] <= 99.0
        assert report["sup_k3_phi"] <= 33.0

    def test_rho_nonnegative_even(self, kernel):
        xs = np.linspace(-30.0, 30.0, 301)
        vals = kernel.rho(xs)
        assert np.all(vals >= 0.0)
        np.testing.assert_allclose(vals, vals[::-1], atol=1e-15)

    def test_phi_monotone_with_limits(self, kernel):
        xs = np.linspace(-80.0, 80.0, 401)
        vals = kernel.phi(xs)
        assert np.all(np.diff(vals) <= 1e-12)
        assert kernel.phi(np.array([-200.0]))[0] == pytest.approx(1.0,
                                                                  abs=1e-7)
        assert kernel.phi(np.array([250.0]))[0] == pytest.approx(0.0,
                                                                 abs=1e-10)

    def test_band_limited(self, kernel):
        for xi in (1.05, 1.5, 3.0, 7.0):
            assert abs(kernel.rho_hat(xi)) <= 1e-6
        assert kernel.rho_hat(0.0) == pytest.approx(1.0, abs=1e-7)

    def test_scaled_family_identity(self):
        kernel = lim.build_kernel(0.25)
        xs = np.linspace(-5.0, 5.0, 41)
        np.testing.assert_allclose(kernel.phi_eps(kernel.epsilon * xs),
                                   kernel.phi(xs), atol=1e-14)
        # rho_eps keeps unit mass
        grid = np.linspace(-60.0, 60.0, 240001)
        mass = np.trapezoid(kernel.rho_eps(grid), grid)
        assert mass == pytest.approx(1.0, abs=1e-6)

    def test_smoothed_step_tail_bound(self, kernel):
        # int_0^inf phi(u - K) du <= K + 4.82 at K = 132^(1/3)
        k_val = 132.0 ** (1.0 / 3.0)
        grid = np.linspace(-k_val, 230.0, 200001)
        integral = np.trapezoid(kernel.phi(grid), grid)
        assert integral <= k_val + 4.82

    def test_epsilon_validation(self):
        with pytest.raises(ValueError):
            lim.build_kernel(0.0)


class TestKolmogorov:
    def test_quantile_discretization_distance_vanishes(self):
        # a law placed at mid-quantiles of a continuous cdf sits at exactly
        # half an atom in the sup metric, so the distance tends to zero
        for m in (10, 1000):
            values = norm.ppf((np.arange(m) + 0.5) / m)
            probs = np.full(m, 1.0 / m)
            d = lim.kolmogorov(values, probs,
                               lambda x: norm.cdf(np.asarray(x)))
            assert d == pytest.approx(0.5 / m, abs=1e-12)

    def test_point_mass_against_gaussian(self):
        d = lim.kolmogorov(np.array([0.0]), np.array([1.0]),
                           lambda x: norm.cdf(np.asarray(x)))
        assert d == pytest.approx(0.5, abs=1e-12)

    def test_matches_dense_grid_scan(self):
        law = sm.cw_magnetization_pmf(0.0, 1.0, 100)
        values = law.axis_values() / 100 ** 0.75
        probs = law.probs()
        fast = lim.kolmogorov(values, probs, lim.quartic_limit_cdf)
        # scan an independent empirical-cdf evaluation over a dense grid
        # refined with the jump points and their left neighbourhoods
        grid = np.sort(np.concatenate([np.linspace(-6.0, 6.0, 200001),
                                       values, values - 1e-12]))
        discrete = np.searchsorted(values, grid, side="right")
        cum = np.concatenate([[0.0], np.cumsum(probs)])
        scan = np.max(np.abs(cum[discrete] - lim.quartic_limit_cdf(grid)))
        assert fast == pytest.approx(scan, abs=1e-10)

    def test_density_cdf_gaussian(self):
        pts = np.linspace(-4.0, 4.0, 33)
        got = lim.density_cdf(pts, lambda x: norm.pdf(np.asarray(x)),
                              lower=-14.0)
        np.testing.assert_allclose(got, norm.cdf(pts), atol=1e-12)

    def test_density_cdf_requires_sorted(self):
        with pytest.raises(ValueError):
            lim.density_cdf(np.array([1.0, 0.0]), lambda x: x, lower=-2.0)


class TestSmoothingLemma:
    def test_zero_case(self):
        assert lim.smoothing_lemma_bound(0.0, 0.0, 0.3) == 0.0

    def test_density_bound_constant(self, consts):
        m = 2.0 / (12.0 ** 0.25 * consts.gamma_quarter)
        assert m == pytest.approx(1.0 / consts.i_inf_cw, rel=1e-12)
        assert lim.smoothing_lemma_bound(1.0, m, 0.1) == pytest.approx(
            2.0 * (1.0 + 10.0 * m) * 0.1)

    def test_linear_in_epsilon(self):
        b0 = lim.smoothing_lemma_bound(2.0, 0.3, 0.1)
        b1 = lim.smoothing_lemma_bound(2.0, 0.3, 0.2)
        assert b1 == pytest.approx(2.0 * b0)


class TestFourierDecay:
    def test_transform_at_zero_is_integral(self, cw_descriptor):
        n = 500
        val = lim.psi_hat(cw_descriptor, n, 0.0)
        assert val.real == pytest.approx(
            mg.residue_integral(cw_descriptor, n), abs=1e-8)
        assert abs(val.imag) < 1e-10

    def test_envelope_at_zero(self, consts):
        assert lim.fourier_decay_K(0.0) == pytest.approx(
            2.0 * consts.i_inf_cw, rel=1e-12)

    def test_modulus_bounded_by_mass(self, cw_descriptor, consts):
        n = 400
        i_n = mg.residue_integral(cw_descriptor, n)
        assert i_n <= 2.0 * consts.i_inf_cw
        for xi in (0.0, 1.0, 4.0):
            assert abs(lim.psi_hat(cw_descriptor, n, xi)) <= i_n * (1 + 1e-9)

    def test_exponential_envelope_coarse(self, cw_descriptor):
        n, b = 1000, 0.77
        cap = lim.fourier_decay_K(b)
        for xi in (0.0, 1.0, 2.5, 6.0, 12.0):
            val = abs(lim.psi_hat(cw_descriptor, n, xi))
            assert val * math.exp(b * xi) <= 1.05 * cap


class TestRateCertificate:
    def test_parameter_window(self):
        with pytest.raises(ValueError):
            lim.rate_certificate(100, 0.5, 1.0)

    def test_assembly_identities(self, consts):
        cert = lim.rate_certificate(400)
        assert cert.epsilon == pytest.approx(1.0 / (0.77 * 20.0))
        want = (2.0 / (consts.i_inf_cw * 20.0)) * (
            lim.fourier_decay_K(0.77) / (math.pi * (0.77 - 0.385))
            + 10.0 / 0.77)
        assert cert.smoothing_term == pytest.approx(want, rel=1e-12)
        assert cert.total_bound == pytest.approx(
            cert.smoothing_term + cert.l1_term, rel=1e-12)

    def test_measured_below_bound(self):
        for n in (100, 400):
            cert = lim.rate_certificate(n)
            assert cert.measured_dkol <= cert.total_bound

    def test_custom_constants_pass_through(self):
        cert = lim.rate_certificate(100, b=0.9, d_const=0.8)
        assert cert.b == 0.9 and cert.d_const == 0.8
        assert cert.epsilon == pytest.approx(1.0 / (0.8 * 10.0))

    def test_json_round_trip(self):
        import json
        cert = lim.rate_certificate(100)
        blob = json.loads(cert.to_json())
        assert blob["n"] == 100
        assert blob["measured_dkol"] == cert.measured_dkol


class TestDensityComparison:
    def test_cdf_distance_bounded_by_l1(self, cw_descriptor, consts):
        # the sup distance between the two smoothed laws never exceeds the
        # L1 gap over I_inf (up to rounding), both sides from quadrature
        for n in (100, 1000):
            i_n = mg.residue_integral(cw_descriptor, n)
            grid = np.linspace(-5.0, 5.0, 2001)
            f_n = lim.density_cdf(
                grid, lambda x: cw_descriptor.psi_n(n, x) / i_n, lower=-12.0)
            f_inf = lim.quartic_limit_cdf(grid)
            sup = float(np.max(np.abs(f_n - f_inf)))
            l1_bound = mg.l1_mod_distance(cw_descriptor, n) / consts.i_inf_cw
            assert sup <= (1.0 + 1e-6) * l1_bound

    def test_l1_and_kolmogorov_decrease_together(self, cw_descriptor):
        ns = (100, 400, 1600)
        l1 = [mg.l1_mod_distance(cw_descriptor, n) for n in ns]
        dk = [lim.measured_kolmogorov(n) for n in ns]
        assert all(b < a for a, b in zip(l1, l1[1:]))
        assert all(b < a for a, b in zip(dk, dk[1:]))

    def test_finite_n_residue_integral_dim2(self):
        desc = mg.descriptor(sm.ModelSpec(sm.ModelKind.WALK, 5, dim=2))
        i_inf = mg.residue_integral(desc, None)
        i_n = mg.residue_integral(desc, 200)
        assert i_n > i_inf
        assert i_n == pytest.approx(i_inf, rel=0.1)


class TestLocalLimit:
    def test_empty_interval(self):
        assert lim.local_limit_check(100, (1.0, 1.0)) == (0.0, 0.0)
        assert lim.local_limit_check(100, (2.0, -1.0)) == (0.0, 0.0)

    def test_interval_additivity_with_atom(self):
        n = 10 ** 4
        lhs_sym, _ = lim.local_limit_check(n, (-1.0, 1.0))
        lhs_half, _ = lim.local_limit_check(n, (0.0, 1.0))
        law = lim.critical_cw_law(n)
        atom = math.sqrt(n) * float(
            law.probs()[np.isclose(law.axis_values(), 0.0)].sum())
        assert lhs_sym == pytest.approx(2.0 * lhs_half - atom, rel=1e-10)

    def test_symmetric_interval_roughly_doubles(self):
        n = 10 ** 6
        lhs_sym, _ = lim.local_limit_check(n, (-1.0, 1.0))
        lhs_half, _ = lim.local_limit_check(n, (0.0, 1.0))
        assert lhs_sym == pytest.approx(2.0 * lhs_half, rel=0.05)

    def test_converges_to_lebesgue_density(self):
        lhs, rhs = lim.local_limit_check(10 ** 5, (0.0, 1.0))
        assert lhs == pytest.approx(rhs, rel=0.08)


class TestDominatedTails:
    def test_unit_value_at_origin(self):
        assert lim.h3_domination_check(400, 0.77) >= 1.0

    def test_stable_under_n_growth(self):
        a = lim.h3_domination_check(1000, 0.77)
        b = lim.h3_domination_check(4000, 0.77)
        assert a < math.inf and b < math.inf
        assert b < 1.5 * a

    def test_envelope_integrable(self):
        k = 0.77
        c = 2.0
        val = integrate_line(lambda x: c * np.exp(-k * np.abs(x) / 2.0),
                             QuadratureConfig(abs_tol=1e-10))
        assert val == pytest.approx(4.0 * c / k, rel=1e-8)

    def test_k_validation(self):
        with pytest.raises(ValueError):
            lim.h3_domination_check(100, 0.0)
