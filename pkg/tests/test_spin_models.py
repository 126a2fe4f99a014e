import io
import itertools
import math

import numpy as np
import pytest

from modspin import spin_models as sm
from modspin.numerics import log_sum_exp


def brute_force_log_z(alpha, beta, n):
    """Exhaustive log partition function, independent of the transfer route."""
    total = []
    for config in itertools.product((1, -1), repeat=n):
        s = np.array(config)
        total.append(alpha * s.sum()
                     + beta * float((s[:-1] * s[1:]).sum()))
    return log_sum_exp(total)


class TestTransferEigen:
    def test_zero_field_specialization(self):
        for beta in (0.0, 0.3, 1.0):
            td = sm.transfer_eigen(0.0, beta)
            assert td.lambda_plus == pytest.approx(2.0 * math.cosh(beta), rel=1e-14)
            assert td.lambda_minus == pytest.approx(2.0 * math.sinh(beta), abs=1e-14)
            assert td.m_bar == 0.0
            assert td.a_plus == pytest.approx(2.0, rel=1e-14)
            assert td.a_minus == pytest.approx(0.0, abs=1e-14)

    def test_matches_2x2_eigen_oracle(self):
        alpha, beta = 0.5, 0.3
        t = np.array([[math.exp(alpha + beta), math.exp(-alpha - beta)],
                      [math.exp(alpha - beta), math.exp(-alpha + beta)]])
        eig = np.sort(np.linalg.eigvals(t))
        td = sm.transfer_eigen(alpha, beta)
        assert td.lambda_minus == pytest.approx(float(eig[0]), abs=1e-12)
        assert td.lambda_plus == pytest.approx(float(eig[1]), abs=1e-12)

    def test_uncoupled_chain(self):
        for alpha in (-0.7, 0.2, 1.1):
            td = sm.transfer_eigen(alpha, 0.0)
            assert td.lambda_plus == pytest.approx(2.0 * math.cosh(alpha), rel=1e-14)
            assert td.m_bar == pytest.approx(math.tanh(alpha), rel=1e-14)
            assert td.sigma2 == pytest.approx(1.0 / math.cosh(alpha) ** 2, rel=1e-13)

    def test_negative_beta_rejected(self):
        with pytest.raises(ValueError):
            sm.transfer_eigen(0.0, -0.1)


class TestPartitionFunction:
    def test_single_spin(self):
        alpha = 0.37
        assert sm.partition_function(alpha, 0.9, 1) == pytest.approx(
            math.log(math.exp(alpha) + math.exp(-alpha)), rel=1e-14)

    def test_two_spins(self):
        alpha, beta = 0.3, 0.7
        expected = math.log(math.exp(2 * alpha + beta)
                            + math.exp(-2 * alpha + beta)
                            + 2 * math.exp(-beta))
        assert sm.partition_function(alpha, beta, 2) == pytest.approx(expected, rel=1e-14)

    def test_exhaustive_oracle_n5(self):
        got = sm.partition_function(0.5, 0.3, 5)
        want = brute_force_log_z(0.5, 0.3, 5)
        assert got == pytest.approx(want, rel=1e-12)

    def test_uncoupled_closed_form(self):
        for n in (1, 7, 50, 200):
            got = sm.partition_function(0.4, 0.0, n)
            assert got == pytest.approx(n * math.log(2 * math.cosh(0.4)), rel=1e-12)

    def test_zero_field_closed_form(self):
        # Z_n = 2^n cosh(beta)^(n-1)
        for n in (2, 10, 200):
            got = sm.partition_function(0.0, 0.8, n)
            want = n * math.log(2.0) + (n - 1) * math.log(math.cosh(0.8))
            assert got == pytest.approx(want, rel=1e-12)


class TestIsingLaplace:
    def test_zero_argument(self):
        assert sm.ising_laplace(0.2, 0.5, 30, 0.0) == pytest.approx(0.0, abs=1e-12)

    def test_mean_slope(self):
        alpha, beta, n = 0.3, 0.6, 4000
        h = 1e-5
        fd = (sm.ising_laplace(alpha, beta, n, h).real
              - sm.ising_laplace(alpha, beta, n, -h).real) / (2 * h)
        td = sm.transfer_eigen(alpha, beta)
        # the derivative is n*m_bar plus an n-independent boundary term
        assert abs(fd - n * td.m_bar) < 2.0

    def test_exhaustive_oracle(self):
        alpha, beta, n, z = 0.2, 0.4, 12, 0.2
        logs = []
        for config in itertools.product((1, -1), repeat=n):
            s = np.array(config)
            m = s.sum()
            logs.append(alpha * m + beta * float((s[:-1] * s[1:]).sum())
                        + z * m)
        want = log_sum_exp(logs) - brute_force_log_z(alpha, beta, n)
        got = sm.ising_laplace(alpha, beta, n, z).real
        assert got == pytest.approx(want, rel=1e-10)

    def test_complex_oracle(self):
        alpha, beta, n = 0.1, 0.5, 10
        z = 0.2 + 0.3j
        acc = []
        for config in itertools.product((1, -1), repeat=n):
            s = np.array(config)
            m = s.sum()
            w = math.exp(alpha * m + beta * float((s[:-1] * s[1:]).sum()))
            acc.append(w * np.exp(z * m))
        want = np.log(np.sum(acc)) - brute_force_log_z(alpha, beta, n)
        got = sm.ising_laplace(alpha, beta, n, z)
        assert got.real == pytest.approx(float(want.real), rel=1e-10)
        assert got.imag == pytest.approx(float(want.imag), abs=1e-10)

    def test_branch_ambiguity_rejected(self):
        # at alpha=0, z = i pi/2 the square-root argument is negative real
        with pytest.raises(sm.BranchError):
            sm.ising_laplace(0.0, 1.0, 8, 1j * math.pi / 2.0)

    def test_grid_matches_scalar(self):
        z = np.linspace(-0.5, 0.5, 11)
        grid = sm.ising_laplace_grid(0.2, 0.7, 40, z)
        scalars = [sm.ising_laplace(0.2, 0.7, 40, float(v)).real for v in z]
        np.testing.assert_allclose(grid, scalars, rtol=1e-12)


class TestModParams:
    def test_zero_field_degenerate(self):
        params = sm.ising_mod_params(0.0, 0.7)
        assert params.psi_cubic == 0.0
        assert params.quartic_regime

    def test_field_sign_flip(self):
        plus = sm.ising_mod_params(0.4, 0.6)
        minus = sm.ising_mod_params(-0.4, 0.6)
        assert plus.psi_cubic == pytest.approx(-minus.psi_cubic, rel=1e-13)
        assert plus.t_coeff == pytest.approx(minus.t_coeff, rel=1e-13)
        assert not plus.quartic_regime

    def test_cubic_vs_finite_difference(self):
        alpha, beta = 0.3, 0.5
        log_lam = lambda a: math.log(sm.transfer_eigen(a, beta).lambda_plus)

        def fd3(h):
            return (log_lam(alpha + 2 * h) - 2 * log_lam(alpha + h)
                    + 2 * log_lam(alpha - h)
                    - log_lam(alpha - 2 * h)) / (2 * h ** 3)

        # one Richardson step removes the O(h^2) truncation term
        h = 2e-3
        oracle = (4.0 * fd3(h / 2) - fd3(h)) / 3.0
        assert sm.ising_mod_params(alpha, beta).psi_cubic == pytest.approx(
            oracle, rel=1e-6)

    def test_alpha0_constants_at_beta0(self):
        t_coeff, quartic = sm.ising_alpha0_mod_params(0.0)
        assert t_coeff == 1.0
        assert quartic == pytest.approx(1.0 / 12.0, rel=1e-14)

    def test_alpha0_quartic_vs_finite_difference(self):
        beta, n = 0.5, 20000
        f = lambda z: sm.ising_laplace(0.0, beta, n, z).real

        def fd4(h):
            return (f(2 * h) - 4 * f(h) + 6 * f(0.0) - 4 * f(-h)
                    + f(-2 * h)) / h ** 4

        h = 0.02
        oracle = (16.0 * fd4(h / 2) - fd4(h)) / 15.0
        _, quartic = sm.ising_alpha0_mod_params(beta)
        # kappa_4(M_n)/n -> -24 * quartic with an O(1/n) correction
        assert oracle / n == pytest.approx(-24.0 * quartic, rel=5e-3)

    def test_scale_coefficient_monotone(self):
        betas = np.linspace(0.0, 2.0, 9)
        coeffs = [sm.ising_alpha0_mod_params(b)[0] for b in betas]
        assert all(b > a for a, b in zip(coeffs, coeffs[1:]))


class TestCwPmf:
    def test_fair_binomial(self):
        n = 14
        pmf = sm.cw_magnetization_pmf(0.0, 0.0, n)
        k = np.arange(n + 1)
        want = np.log([math.comb(n, int(j)) for j in k]) - n * math.log(2.0)
        # support ascending in M: M = n - 2k reversed
        np.testing.assert_allclose(pmf.log_probs, want[::-1], atol=1e-12)

    def test_brute_force_total_variation(self):
        pmf = sm.cw_magnetization_pmf(0.0, 1.0, 10)
        oracle = sm.brute_force_pmf(
            sm.ModelSpec(sm.ModelKind.CURIE_WEISS, 10, 0.0, 1.0))
        tv = 0.5 * np.abs(pmf.probs() - oracle.probs()).sum()
        assert tv < 1e-12

    @pytest.mark.parametrize("alpha,beta,n", [(0.0, 0.0, 5), (0.3, 0.9, 41),
                                              (-0.2, 1.0, 128)])
    def test_normalized(self, alpha, beta, n):
        pmf = sm.cw_magnetization_pmf(alpha, beta, n)
        assert abs(pmf.total_log_mass()) < 1e-12

    def test_symmetric_bitwise_at_zero_field(self):
        pmf = sm.cw_magnetization_pmf(0.0, 0.77, 201)
        assert np.array_equal(pmf.log_probs, pmf.log_probs[::-1])


class TestIsingPmf:
    def test_matches_laplace_route(self):
        pmf = sm.ising_magnetization_pmf(0.0, 0.5, 100)
        m = pmf.axis_values()
        for z in (0.1, 0.5):
            from_pmf = log_sum_exp(pmf.log_probs + z * m)
            from_transfer = sm.ising_laplace(0.0, 0.5, 100, z).real
            assert from_pmf == pytest.approx(from_transfer, rel=1e-10)

    def test_uncoupled_reduces_to_binomial(self):
        a = sm.ising_magnetization_pmf(0.4, 0.0, 30)
        b = sm.cw_magnetization_pmf(0.4, 0.0, 30)
        np.testing.assert_allclose(a.log_probs, b.log_probs, atol=1e-11)

    def test_exhaustive_oracle(self):
        got = sm.ising_magnetization_pmf(0.2, 0.6, 12)
        want = sm.brute_force_pmf(sm.ModelSpec(sm.ModelKind.ISING, 12, 0.2, 0.6))
        np.testing.assert_allclose(got.log_probs, want.log_probs, atol=1e-12)

    def test_cap(self):
        with pytest.raises(ValueError, match="Laplace"):
            sm.ising_magnetization_pmf(0.0, 0.5, 10 ** 6)

    def test_symmetric_bitwise_at_zero_field(self):
        pmf = sm.ising_magnetization_pmf(0.0, 0.9, 144)
        assert np.array_equal(pmf.log_probs, pmf.log_probs[::-1])

    def test_log_laplace_convex_with_zero_at_zero(self):
        pmf = sm.ising_magnetization_pmf(0.0, 0.7, 60)
        m = pmf.axis_values()
        zs = np.linspace(-0.8, 0.8, 33)
        vals = np.array([log_sum_exp(pmf.log_probs + z * m) for z in zs])
        assert vals[16] == pytest.approx(0.0, abs=1e-12)
        second = vals[2:] - 2 * vals[1:-1] + vals[:-2]
        assert np.all(second > -1e-10)

    def test_mixed_pmf_brute_force(self):
        got = sm.mixed_magnetization_pmf(0.4, 0.3, 12)
        want = sm.brute_force_pmf(
            sm.ModelSpec(sm.ModelKind.MIXED, 12, 0.0, 0.4, 0.3))
        np.testing.assert_allclose(got.log_probs, want.log_probs, atol=1e-12)


class TestWalkPmf:
    def test_single_step_two_dim(self):
        pmf = sm.random_walk_pmf(2, 1)
        p = pmf.probs()
        coords = pmf.axis_values()
        for target in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            i = np.searchsorted(coords, target[0])
            j = np.searchsorted(coords, target[1])
            assert p[i, j] == pytest.approx(0.25)
        assert p.sum() == pytest.approx(1.0)

    def test_dim1_is_binomial(self):
        walk = sm.random_walk_pmf(1, 24)
        cw = sm.cw_magnetization_pmf(0.0, 0.0, 24)
        np.testing.assert_allclose(walk.log_probs, cw.log_probs, atol=1e-12)

    def test_laplace_closed_form_two_dim(self):
        n = 20
        pmf = sm.random_walk_pmf(2, n)
        t1, t2 = 0.3, -0.2
        vals = pmf.values()
        weights = pmf.probs()
        got = float(np.sum(weights * np.exp(t1 * vals[..., 0]
                                            + t2 * vals[..., 1])))
        want = ((math.cosh(t1) + math.cosh(t2)) / 2.0) ** n
        assert got == pytest.approx(want, rel=1e-12)

    def test_parity(self):
        n = 9
        pmf = sm.random_walk_pmf(2, n)
        coords = pmf.axis_values().astype(int)
        x, y = np.meshgrid(coords, coords, indexing="ij")
        wrong = (x + y - n) % 2 != 0
        assert np.all(np.isneginf(pmf.log_probs[wrong]))

    def test_three_dim_counts(self):
        got = sm.random_walk_pmf(3, 6)
        want = sm.brute_force_pmf(sm.ModelSpec(sm.ModelKind.WALK, 6, dim=3))
        np.testing.assert_allclose(got.probs(), want.probs(), atol=1e-14)

    def test_caps(self):
        with pytest.raises(ValueError):
            sm.random_walk_pmf(2, 501)
        with pytest.raises(ValueError):
            sm.random_walk_pmf(3, 81)


class TestBruteForce:
    def test_uniform_curie_weiss(self):
        pmf = sm.brute_force_pmf(sm.ModelSpec(sm.ModelKind.CURIE_WEISS, 3))
        p = pmf.probs()
        # all 8 configurations equally likely
        assert p[0] == pytest.approx(1.0 / 8.0)      # M = -3
        assert p[-1] == pytest.approx(1.0 / 8.0)     # M = +3
        assert p[1] == pytest.approx(3.0 / 8.0)

    def test_enumeration_cap(self):
        with pytest.raises(ValueError):
            sm.brute_force_pmf(sm.ModelSpec(sm.ModelKind.CURIE_WEISS, 21))


class TestSampling:
    def test_deterministic_given_seed(self):
        spec = sm.ModelSpec(sm.ModelKind.ISING, 100, 0.0, 1.0)
        a = sm.sample_configuration(spec, 7)
        b = sm.sample_configuration(spec, 7)
        c = sm.sample_configuration(spec, 8)
        assert np.array_equal(a.spins, b.spins)
        assert not np.array_equal(a.spins, c.spins)

    def test_free_spins_unbiased(self):
        spec = sm.ModelSpec(sm.ModelKind.CURIE_WEISS, 100)
        total = 0
        draws = 2000
        for seed in range(draws):
            total += sm.sample_configuration(spec, seed).magnetization
        n_spins = 100 * draws
        # 3 sigma band for a sum of fair +/-1 variables
        assert abs(total) < 3.0 * math.sqrt(n_spins)

    def test_ising_bond_correlation(self):
        beta = 1.0
        spec = sm.ModelSpec(sm.ModelKind.ISING, 200, 0.0, beta)
        acc, cnt = 0.0, 0
        for seed in range(300):
            s = sm.sample_configuration(spec, seed).spins.astype(int)
            acc += float((s[:-1] * s[1:]).sum())
            cnt += len(s) - 1
        x = math.tanh(beta)
        sd = math.sqrt((1 - x * x) / cnt)
        assert abs(acc / cnt - x) < 5.0 * sd

    def test_ising_field_matches_pmf_moments(self):
        spec = sm.ModelSpec(sm.ModelKind.ISING, 40, 0.5, 0.4)
        pmf = sm.ising_magnetization_pmf(0.5, 0.4, 40)
        mean_exact = float(np.dot(pmf.probs(), pmf.axis_values()))
        var_exact = float(np.dot(pmf.probs(),
                                 (pmf.axis_values() - mean_exact) ** 2))
        draws = 3000
        ms = [sm.sample_configuration(spec, seed).magnetization
              for seed in range(draws)]
        sd = math.sqrt(var_exact / draws)
        assert abs(np.mean(ms) - mean_exact) < 5.0 * sd

    def test_curie_weiss_empirical_chi2(self):
        n, beta = 10, 1.0
        spec = sm.ModelSpec(sm.ModelKind.CURIE_WEISS, n, 0.0, beta)
        pmf = sm.cw_magnetization_pmf(0.0, beta, n)
        draws = 20000
        counts = np.zeros(n + 1)
        for seed in range(draws):
            m = sm.sample_configuration(spec, seed).magnetization
            counts[(m + n) // 2] += 1
        expected = pmf.probs() * draws
        chi2 = float(np.sum((counts - expected) ** 2 / expected))
        # 10 effective degrees of freedom; 1e-4 quantile is about 40
        assert chi2 < 40.0

    def test_mixed_model_chi2(self):
        n, beta, gamma = 8, 0.5, 0.3
        spec = sm.ModelSpec(sm.ModelKind.MIXED, n, 0.0, beta, gamma)
        pmf = sm.mixed_magnetization_pmf(beta, gamma, n)
        draws = 4000
        counts = np.zeros(n + 1)
        for seed in range(draws):
            m = sm.sample_configuration(spec, seed).magnetization
            counts[(m + n) // 2] += 1
        expected = pmf.probs() * draws
        chi2 = float(np.sum((counts - expected) ** 2 / expected))
        assert chi2 < 40.0


class TestSerialization:
    def test_round_trip_dim1(self):
        pmf = sm.cw_magnetization_pmf(0.3, 0.8, 17)
        buf = io.StringIO()
        sm.write_pmf_csv(pmf, buf)
        buf.seek(0)
        back = sm.read_pmf_csv(buf)
        assert back.offset == pmf.offset
        assert back.step == pmf.step
        assert back.meta["variant"] == "curie_weiss"
        np.testing.assert_allclose(back.log_probs, pmf.log_probs, atol=1e-15)

    def test_round_trip_dim2(self):
        pmf = sm.random_walk_pmf(2, 4)
        buf = io.StringIO()
        sm.write_pmf_csv(pmf, buf)
        buf.seek(0)
        back = sm.read_pmf_csv(buf)
        np.testing.assert_allclose(back.log_probs, pmf.log_probs, atol=1e-15)

    def test_header_line_is_json(self):
        pmf = sm.cw_magnetization_pmf(0.0, 0.0, 3)
        buf = io.StringIO()
        sm.write_pmf_csv(pmf, buf)
        first = buf.getvalue().splitlines()[0]
        assert first.startswith("# ")
        import json
        header = json.loads(first[2:])
        assert header["n"] == 3
        assert header["step"] == 2.0


class TestModelSpecValidation:
    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            sm.ModelSpec(sm.ModelKind.ISING, 0)
        with pytest.raises(ValueError):
            sm.ModelSpec(sm.ModelKind.ISING, 5, beta=-0.1)
        with pytest.raises(ValueError):
            sm.ModelSpec(sm.ModelKind.MIXED, 5, gamma=1.5)
        with pytest.raises(ValueError):
            sm.ModelSpec(sm.ModelKind.WALK, 5, dim=4)
        with pytest.raises(ValueError):
            sm.ModelSpec(sm.ModelKind.ISING, 5, dim=2)
