import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from chromax import approx, chromatic as ch, kernels, orthopoly as op
from chromax.errors import (
    IRLSNonConvergence,
    KernelMismatch,
    ParameterInfeasible,
    ParameterOutOfRange,
)


class TestMultipliers:
    def test_partial(self):
        np.testing.assert_array_equal(approx.summability_multipliers(3), np.ones(4))

    def test_cesaro(self):
        np.testing.assert_allclose(approx.summability_multipliers(4, "cesaro"),
                                   [1.0, 0.75, 0.5, 0.25])

    def test_dvp_is_twice_cesaro_2n_minus_cesaro_n(self):
        for n in (1, 2, 5, 9):
            c2 = approx.summability_multipliers(2 * n, "cesaro")
            c1 = np.r_[approx.summability_multipliers(n, "cesaro"), np.zeros(n)]
            np.testing.assert_allclose(approx.summability_multipliers(n, "dvp"), 2 * c2 - c1,
                                       atol=1e-15)

    def test_errors(self):
        with pytest.raises(ParameterOutOfRange):
            approx.summability_multipliers(0, "dvp")
        with pytest.raises(ParameterOutOfRange):
            approx.summability_multipliers(-1)
        with pytest.raises(ParameterOutOfRange):
            approx.summability_multipliers(3, "abel")


class TestDvpReproduction:
    basis = ch.build_basis(kernels.laplace(), op.laguerre(0.0), 1.0, 15)
    x = np.linspace(0.0, 4.0, 9)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 8), st.lists(st.floats(-3, 3), min_size=9, max_size=9))
    def test_polynomial_coefficients(self, n, q):
        c = np.zeros(16)
        c[: n + 1] = q[: n + 1]
        coeffs = ch.ChromaticCoefficients((c,))
        v = ch.reconstruct(self.basis, coeffs, self.x, n, "dvp")
        s = ch.reconstruct(self.basis, coeffs, self.x, 2 * n - 1, "partial")
        assert np.max(np.abs(v - s)) < 1e-10

    def test_polynomial_through_quadrature(self):
        # fhat = q(y) sqrt(w_x0) with q of degree 3 has coefficients only up to 3
        seg = self.basis.segments[0]
        fhat = lambda y: (1 - y + 0.25 * y**3) * seg.sqrt_weight(y)
        c = ch.chromatic_coefficients(self.basis, fhat)
        np.testing.assert_allclose(c[0][4:], 0.0, atol=1e-11)
        v = ch.reconstruct(self.basis, c, self.x, 3, "dvp")
        s = ch.reconstruct(self.basis, c, self.x, 5, "partial")
        assert np.max(np.abs(v - s)) < 1e-10
        # Laplace transform of y**k exp(-s y) is k!/(x+s)**(k+1); here s = x0 + 1/2
        z = self.x + 1.5
        exact = 1 / z - 1 / z**2 + 0.25 * 6 / z**4
        np.testing.assert_allclose(v, exact, rtol=1e-9)


class TestWeightedNorm:
    def test_examples(self):
        one = lambda y: np.ones_like(np.asarray(y, dtype=float))
        assert approx.weighted_norm(lambda y: y, one, 1, (0.0, 1.0)) == pytest.approx(0.5)
        assert approx.weighted_norm(lambda y: y, one, np.inf, (0.0, 1.0)) == pytest.approx(1.0)
        v = approx.weighted_norm(lambda y: np.ones_like(y), lambda y: np.exp(-y * y), 2,
                                 (-np.inf, np.inf))
        assert v == pytest.approx(math.pi**0.25, rel=1e-12)

    @pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, np.inf])
    def test_homogeneity(self, p):
        h = lambda y: (2 + np.sin(3 * y)) * np.exp(-y)
        w = lambda y: np.exp(-y)
        a = approx.weighted_norm(h, w, p, (0.0, np.inf))
        b = approx.weighted_norm(lambda y: -2.5 * h(y), w, p, (0.0, np.inf))
        assert b == pytest.approx(2.5 * a, rel=1e-12)

    def test_discrete_grid(self):
        y = np.array([0.0, 1.0, 2.0])
        m = np.array([0.5, 0.25, 0.25])
        v = approx.weighted_norm(lambda t: t, lambda t: np.ones_like(t), 2, (y, m))
        assert v == pytest.approx(math.sqrt(0.25 + 1.0))

    def test_p_below_one(self):
        with pytest.raises(ParameterOutOfRange):
            approx.weighted_norm(lambda y: y, lambda y: y, 0.5, (0.0, 1.0))


def brute_discrete(y, m, G, W, n, p):
    """Minimize sum m |G - W P|**p over monomial coefficients by Nelder-Mead."""
    V = np.vander(y, n + 1, increasing=True) * W[:, None]
    c0 = np.linalg.lstsq(V * np.sqrt(m)[:, None], G * np.sqrt(m), rcond=None)[0]
    f = lambda c: np.sum(m * np.abs(G - V @ c) ** p)
    best = optimize.minimize(f, c0, method="Nelder-Mead",
                             options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 40000})
    return best.fun ** (1 / p)


class TestENProxy:
    grid = (np.linspace(-1, 1, 201), np.full(201, 2 / 201))
    g = staticmethod(lambda y: np.abs(y) ** 1.5)
    w = staticmethod(lambda y: np.ones_like(np.asarray(y, dtype=float)))

    def test_least_squares_oracle(self):
        y, m = self.grid
        for n in (0, 2, 5):
            V = np.vander(y, n + 1)
            c = np.linalg.lstsq(V * np.sqrt(m)[:, None], self.g(y) * np.sqrt(m), rcond=None)[0]
            ref = math.sqrt(np.sum(m * (self.g(y) - V @ c) ** 2))
            got = approx.en_proxy(self.g, self.w, 2, n, self.grid).value
            assert got == pytest.approx(ref, rel=1e-9)

    @pytest.mark.parametrize("p", [1.5, 3.0])
    def test_irls_against_direct_minimization(self, p):
        y, m = self.grid
        for n in (1, 2):
            ref = brute_discrete(y, m, self.g(y), self.w(y), n, p)
            got = approx.en_proxy(self.g, self.w, p, n, self.grid).value
            assert got <= ref * (1 + 1e-6)
            assert got == pytest.approx(ref, rel=1e-4)

    def test_constant_fit_closed_forms(self):
        y, m = self.grid
        G = self.g(y)
        # sup norm: half the range; l1 with equal masses: distance to the median
        assert approx.en_proxy(self.g, self.w, np.inf, 0, self.grid).value == pytest.approx(
            0.5 * (G.max() - G.min()), rel=1e-9)
        assert approx.en_proxy(self.g, self.w, 1, 0, self.grid).value == pytest.approx(
            np.sum(m * np.abs(G - np.median(G))), rel=1e-9)

    @pytest.mark.parametrize("p", [1, 1.5, 2, 4, np.inf])
    def test_monotone_in_degree(self, p):
        vals = [approx.en_proxy(self.g, self.w, p, n, self.grid).value for n in range(0, 9)]
        assert all(b <= a * (1 + 1e-8) for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("p", [1, 2, 3, np.inf])
    def test_polynomial_is_reproduced(self, p):
        poly = lambda y: 1 - 2 * y + y**3
        assert approx.en_proxy(poly, self.w, p, 3, self.grid).value < 1e-9

    def test_weighted_on_interval(self):
        # 1/(1+y) against exp(-y/2) on the half line
        w = lambda y: np.exp(-np.asarray(y) / 2)
        vals = [approx.en_proxy(lambda y: 1 / (1 + y), w, 2, n, (0.0, np.inf)).value
                for n in (1, 3, 6)]
        assert vals[0] > vals[1] > vals[2] > 0

    def test_irls_warning(self):
        with pytest.warns(IRLSNonConvergence):
            approx.en_proxy(self.g, self.w, 1.1, 4, self.grid, max_iter=2)

    def test_grid_too_small(self):
        with pytest.raises(ParameterOutOfRange):
            approx.en_proxy(self.g, self.w, 2, 5, (np.linspace(-1, 1, 30), np.ones(30)))


class TestConvergence:
    def test_laplace_report(self):
        rep = approx.convergence_experiment(approx.laplace_sweep(degrees=(2, 4, 8)))
        lhs = rep.column("lhs_norm")
        assert np.all(np.diff(lhs) < 0)
        assert np.all(rep.column("ratio") <= 10)
        assert rep.meta["N_max"] == 15

    def test_fbar_matches_numeric_transform(self):
        fhat, fbar = approx.laplace_test_function()
        x = np.array([0.0, 0.5, 3.0, 700.0])
        v, _ = kernels.transform(kernels.laplace(), fhat, x)
        np.testing.assert_allclose(fbar(x), v, rtol=1e-10)

    def test_reduces_to_unweighted(self):
        a = approx.convergence_experiment(approx.laplace_weighted_sweep(2.0, 2.0, 0.0, 0.0,
                                                                  degrees=(2, 6)))
        b = approx.convergence_experiment(approx.laplace_sweep(degrees=(2, 6)))
        np.testing.assert_allclose(a.column("lhs_norm"), b.column("lhs_norm"), rtol=1e-10)

    def test_infeasible_parameters(self):
        with pytest.raises(ParameterInfeasible):
            approx.laplace_weighted_sweep(p=2.0, q=2.0, a=0.6)
        with pytest.raises(ParameterInfeasible):
            approx.laplace_weighted_sweep(p=3.0, q=2.0, a=0.2, delta=0.02, eps=0.01)
        with pytest.raises(ParameterInfeasible):
            approx.laplace_power_sweep(p=1.5, q=2.0, a=0.2, b=0.1)
        with pytest.raises(ParameterInfeasible):
            approx.laplace_power_sweep(p=3.0, q=1.5, a=0.2)
        with pytest.raises(ParameterInfeasible):
            approx.laplace_sweep().__class__("x", kernels.laplace(), op.laguerre(0.0), 0.0,
                                             lambda y: y, p=0.5)

    def test_config_validation(self):
        with pytest.raises(ParameterOutOfRange):
            approx.laplace_sweep(degrees=())
        with pytest.raises(ParameterOutOfRange):
            approx.laplace_sweep(degrees=(0, 2))

    def test_poisson_rejected(self):
        cfg = approx.ConvergenceConfig("w", kernels.poisson_wavelet(1), None, (1.0, 0.0),
                                       lambda y: np.exp(-y))
        with pytest.raises(KernelMismatch):
            approx.convergence_experiment(cfg)
