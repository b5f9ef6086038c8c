import math

import mpmath
import numpy as np
import pytest

from chromax import orthopoly as op
from chromax.errors import DegreeOutOfRange, GridTooCoarse, ParameterOutOfRange


def hankel_betas(moments, n):
    """beta_0..beta_n of a symmetric weight from Hankel determinants (mpmath oracle)."""
    def D(k):
        if k == 0:
            return mpmath.mpf(1)
        return mpmath.det(mpmath.matrix([[moments[i + j] for j in range(k)] for i in range(k)]))

    dets = [D(k) for k in range(n + 2)]
    out = [moments[0]]
    for k in range(1, n + 1):
        out.append(dets[k + 1] * dets[k - 1] / dets[k] ** 2)
    return np.array([float(b) for b in out])


def orthonormality_error(rec, w, n):
    rule = op.gauss_rule(rec, n + 2)
    P = op.eval_orthonormal(rec, n, rule.nodes)
    G = (P * rule.weights) @ P.T
    return np.max(np.abs(G - np.eye(n + 1)))


class TestClassical:
    def test_hermite_coefficients(self):
        rec = op.classical_recurrence(op.hermite(), 10)
        assert rec.beta[0] == pytest.approx(math.sqrt(math.pi))
        np.testing.assert_allclose(rec.beta[1:], np.arange(1, 11) / 2)
        assert np.all(rec.alpha == 0)

    def test_scaled_laguerre_mass(self):
        rec = op.classical_recurrence(op.scaled_laguerre(1.5, 3.0), 4)
        assert rec.beta[0] == pytest.approx(math.gamma(2.5) / 3.0**2.5, rel=1e-14)
        assert rec.alpha[0] == pytest.approx(2.5 / 3.0)

    def test_jacobi_matches_mpmath_moments(self):
        mpmath.mp.dps = 50
        # (1-y^2)^0.5 is symmetric, so the Hankel route applies
        mom = [mpmath.quad(lambda t: t**k * (1 - t * t) ** 0.5, [-1, 1]) for k in range(24)]
        rec = op.classical_recurrence(op.jacobi(0.5, 0.5), 10)
        np.testing.assert_allclose(rec.beta, hankel_betas(mom, 10), rtol=1e-12)
        np.testing.assert_allclose(rec.alpha, 0.0, atol=1e-15)

    def test_no_closed_form_for_freud(self):
        with pytest.raises(ParameterOutOfRange):
            op.classical_recurrence(op.freud(4), 3)


class TestStieltjes:
    def test_freud_mass(self):
        rec = op.stieltjes_recurrence(op.freud(4), 4)
        assert rec.beta[0] == pytest.approx(math.gamma(0.25) / 2, rel=1e-12)

    def test_freud_against_hankel_oracle(self):
        mpmath.mp.dps = 80
        mom = [mpmath.gamma(mpmath.mpf(k + 1) / 4) / 2 if k % 2 == 0 else mpmath.mpf(0)
               for k in range(26)]
        rec = op.stieltjes_recurrence(op.freud(4), 11)
        np.testing.assert_allclose(rec.beta, hankel_betas(mom, 11), rtol=1e-10)
        np.testing.assert_allclose(rec.alpha, 0.0, atol=1e-12)

    @pytest.mark.parametrize("alpha,s", [(0.0, 1.0), (1.5, 3.0), (-0.5, 2.0)])
    def test_generic_weight_matches_classical(self, alpha, s):
        w = op.generic(lambda y: y**alpha * np.exp(-s * y), op.HALF_LINE,
                       lambda y: alpha * np.log(y) - s * y)
        num = op.stieltjes_recurrence(w, 20)
        ref = op.classical_recurrence(op.scaled_laguerre(alpha, s), 20)
        np.testing.assert_allclose(num.alpha, ref.alpha, rtol=1e-9)
        np.testing.assert_allclose(num.beta, ref.beta, rtol=1e-9)

    def test_discrete_measure(self):
        x = np.linspace(-1, 1, 7)
        rec = op.recurrence_from_measure(x, np.full(7, 1 / 7), 6)
        P = op.eval_orthonormal(rec, 6, x)
        np.testing.assert_allclose((P / 7) @ P.T, np.eye(7), atol=1e-12)
        with pytest.raises(DegreeOutOfRange):
            op.recurrence_from_measure(x, np.ones(7), 7)


def exact_moment(w, k):
    """(int y**k w, int |y|**k w) by closed forms or 40-digit mpmath quadrature."""
    mpmath.mp.dps = 40
    if w.family == "hermite":
        a = mpmath.gamma(mpmath.mpf(k + 1) / 2)
        return (0.0 if k % 2 else float(a)), float(a)
    if w.family == "laguerre":
        v = float(mpmath.gamma(k + w.params[0] + 1))
        return v, v
    a, b = w.params
    f = lambda t: (1 - t) ** a * (1 + t) ** b
    v = mpmath.quad(lambda t: t**k * f(t), [-1, 0, 1])
    s = mpmath.quad(lambda t: abs(t) ** k * f(t), [-1, 0, 1])
    return float(v), float(s)


class TestGaussRule:
    @pytest.mark.parametrize("w", [op.hermite(), op.laguerre(0.0), op.laguerre(1.5),
                                   op.jacobi(0.5, 0.5), op.jacobi(-0.5, 2.0)],
                             ids=["hermite", "laguerre0", "laguerre1.5", "jacobi", "jacobi-skew"])
    def test_monomial_exactness(self, w):
        n = 12
        rule = op.gauss_rule(op.classical_recurrence(w, n), n)
        for k in range(2 * n):
            exact, scale = exact_moment(w, k)
            got = rule.integrate(lambda y: y**k)
            assert abs(got - exact) <= 1e-10 * scale

    def test_rule_size_bounds(self):
        rec = op.classical_recurrence(op.hermite(), 5)
        with pytest.raises(DegreeOutOfRange):
            op.gauss_rule(rec, 7)
        assert op.gauss_rule(rec, 6).nodes.size == 6

    @pytest.mark.parametrize("w", [op.hermite(), op.laguerre(1.5), op.jacobi(0.5, 0.5)])
    def test_orthonormality(self, w):
        assert orthonormality_error(op.classical_recurrence(w, 20), w, 15) < 1e-12


class TestOrthoSeries:
    def test_evaluates_combination(self):
        rec = op.classical_recurrence(op.hermite(), 3)
        s = op.OrthoSeries(rec, [1.0, 0.0, 2.0])
        y = np.linspace(-1, 1, 5)
        P = op.eval_orthonormal(rec, 2, y)
        np.testing.assert_allclose(s(y), P[0] + 2 * P[2])
        assert s.degree == 2


class TestGammaLambda:
    def test_hermite_gamma(self):
        rec = op.classical_recurrence(op.hermite(), 10)
        grid = np.linspace(-12, 12, 20001)
        one = lambda y: np.ones_like(y)
        assert op.gamma_lambda(rec, op.hermite(), one, 3, grid).gamma == pytest.approx(math.sqrt(2))
        g0 = op.gamma_lambda(rec, op.hermite(), one, 0, grid)
        assert g0.gamma == pytest.approx(math.sqrt(0.5))
        assert math.isnan(g0.ratio)

    def test_jacobi_ratio_bounded(self):
        w = op.jacobi(0.0, 0.0)
        rec = op.classical_recurrence(w, 70)
        # cosine spacing resolves the steep rise of the sum near +-1
        grid = np.cos(np.linspace(0, np.pi, 200001))[1:-1]
        rho = lambda y: np.sqrt(1 - y * y)
        ratios = [op.gamma_lambda(rec, w, rho, n, grid).ratio for n in (4, 8, 16, 32, 64)]
        assert max(ratios) < 1.0
        assert max(ratios) / min(ratios) < 2.0

    def test_grid_must_cover_support(self):
        rec = op.classical_recurrence(op.hermite(), 5)
        with pytest.raises(GridTooCoarse):
            op.gamma_lambda(rec, op.hermite(), lambda y: np.ones_like(y), 3,
                            np.linspace(-1, 1, 1001))


class TestValidation:
    def test_exponents(self):
        with pytest.raises(ParameterOutOfRange):
            op.laguerre(-1.0)
        with pytest.raises(ParameterOutOfRange):
            op.freud(3)
        with pytest.raises(ParameterOutOfRange):
            op.scaled_laguerre(0.0, -1.0)

    def test_degree_range(self):
        rec = op.classical_recurrence(op.hermite(), 3)
        with pytest.raises(DegreeOutOfRange):
            op.eval_orthonormal(rec, 4, 0.0)
