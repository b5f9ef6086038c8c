import math

import numpy as np
import pytest
from scipy.special import eval_hermite

from _oracles import orthonormality_error
from chromax import chromatic as ch
from chromax import kernels, orthopoly as op, wavelet
from chromax.errors import DegreeOutOfRange, DomainViolation, KernelMismatch


def hermite_function(n, x):
    norm = math.sqrt(2.0**n * math.factorial(n) * math.sqrt(math.pi))
    return eval_hermite(n, x) / norm * np.exp(-x * x / 2)


class TestPointWeights:
    @pytest.mark.parametrize("alpha", [0.0, 1.5])
    @pytest.mark.parametrize("x0", [0.0, 1.0])
    def test_laplace_orthonormal(self, alpha, x0):
        b = ch.build_basis(kernels.laplace(), op.laguerre(alpha), x0, 15)
        assert orthonormality_error(b.segments[0], 15) < 1e-8

    def test_laplace_shift_rescales_laguerre(self):
        b = ch.build_basis(kernels.laplace(), op.laguerre(1.5), 1.0, 5)
        w = b.segments[0].weight
        assert w.family == "scaled_laguerre"
        assert w.params == (1.5, 3.0)
        y = np.array([0.3, 2.0])
        np.testing.assert_allclose(w(y), y**1.5 * np.exp(-3 * y), rtol=1e-14)

    @pytest.mark.parametrize("w", [op.hermite(), op.freud(4), op.jacobi(0.5, 0.5)],
                             ids=["hermite", "freud", "jacobi"])
    def test_fourier_orthonormal(self, w):
        b = ch.build_basis(kernels.fourier(), w, 0.0, 15)
        assert orthonormality_error(b.segments[0], 15) < 1e-8

    @pytest.mark.parametrize("z0", [0.0, 0.5, -1.0])
    def test_bargmann_affine_hermite(self, z0):
        b = ch.build_basis(kernels.bargmann(), op.hermite(), z0, 15)
        seg = b.segments[0]
        assert orthonormality_error(seg, 15) < 1e-8
        # the point weight is a shifted, rescaled Gaussian centred at z0/sqrt(2)
        rec = op.stieltjes_recurrence(seg.weight, 12)
        np.testing.assert_allclose(seg.rec.alpha[:12], rec.alpha[:12], atol=1e-10)
        np.testing.assert_allclose(seg.rec.beta[:12], rec.beta[:12], rtol=1e-10)
        assert seg.rec.alpha[0] == pytest.approx(z0 / math.sqrt(2), abs=1e-14)

    @pytest.mark.parametrize("a0,b0", [(1.0, 0.0), (0.5, 2.0), (-1.0, 0.5)])
    def test_poisson_segments(self, a0, b0):
        b = wavelet.split_basis(1, (a0, b0), 15)
        assert b.split
        ivs = [s.interval for s in b.segments]
        cut = b0 + a0
        if a0 > 0:
            assert (ivs[0].lo, ivs[0].hi, ivs[1].lo, ivs[1].hi) == (b0, cut, cut, math.inf)
        else:
            assert (ivs[0].lo, ivs[0].hi, ivs[1].lo, ivs[1].hi) == (-math.inf, cut, cut, b0)
        for seg in b.segments:
            assert orthonormality_error(seg, 15) < 1e-8
        assert sorted(s.sign for s in b.segments) == [-1, 1]

    def test_weight_count_must_match_segments(self):
        from chromax.errors import ParameterOutOfRange
        with pytest.raises(ParameterOutOfRange):
            wavelet.split_basis(1, (1.0, 0.0), 4, weights=[None])


class TestLaplacePipeline:
    def setup_method(self):
        self.basis = ch.build_basis(kernels.laplace(), op.laguerre(0.0), 0.0, 10)
        self.fhat = lambda y: np.exp(-np.asarray(y) / 2)

    def test_reconstruction_is_exact(self):
        c = ch.chromatic_coefficients(self.basis, self.fhat)
        # only the constant term survives: fhat = sqrt(w_0)
        assert c[0][0] == pytest.approx(1.0, rel=1e-12)
        np.testing.assert_allclose(c[0][1:], 0.0, atol=1e-12)
        x = np.linspace(0.0, 5.0, 20)
        for N in (0, 3, 10):
            np.testing.assert_allclose(ch.reconstruct(self.basis, c, x, N), 1 / (x + 0.5),
                                       rtol=1e-10)

    def test_basis_function_closed_form(self):
        x = np.linspace(0.1, 4.0, 7)
        for m in range(11):
            np.testing.assert_allclose(ch.basis_function(self.basis, m, x),
                                       ch.laplace_basis_closed_form(self.basis, m, x),
                                       rtol=1e-9, atol=1e-12)

    def test_closed_form_with_shift_and_exponent(self):
        b = ch.build_basis(kernels.laplace(), op.laguerre(1.5), 1.0, 6)
        x = np.array([0.2, 1.0, 3.0])
        for m in range(7):
            np.testing.assert_allclose(ch.basis_function(b, m, x),
                                       ch.laplace_basis_closed_form(b, m, x), rtol=1e-9)

    def test_chromatic_derivative(self):
        # int exp(-y/2) * exp(-y/2) * exp(-2 y) dy
        assert ch.chromatic_derivative_at(self.basis, self.fhat, 0, 2.0) == pytest.approx(1 / 3)

    def test_power_coefficients(self):
        a = ch.power_coefficients(self.basis.segments[0].rec, 2)
        # orthonormal Laguerre L_2 = 1 - 2y + y^2/2
        np.testing.assert_allclose(a, [1.0, -2.0, 0.5], atol=1e-14)

    def test_closed_form_needs_laplace(self):
        b = ch.build_basis(kernels.fourier(), op.hermite(), 0.0, 2)
        with pytest.raises(KernelMismatch):
            ch.laplace_basis_closed_form(b, 1, 0.0)


class TestFourierHermite:
    def test_eigenrelation(self):
        b = ch.build_basis(kernels.fourier(), op.hermite(), 0.0, 8)
        x = np.linspace(-4, 4, 41)
        for n in range(9):
            ref = 1j**n * hermite_function(n, x)
            assert np.max(np.abs(ch.basis_function(b, n, x) - ref)) < 1e-10

    def test_mass_carries_kernel_constant(self):
        b = ch.build_basis(kernels.fourier(), op.hermite(), 0.0, 3)
        assert b.segments[0].rec.beta[0] == pytest.approx(math.sqrt(math.pi) / (2 * math.pi))


class TestReconstruction:
    def setup_method(self):
        self.basis = ch.build_basis(kernels.fourier(), op.hermite(), 0.0, 16)
        self.fhat = lambda y: np.exp(-np.asarray(y) ** 2)
        self.c = ch.chromatic_coefficients(self.basis, self.fhat)
        self.x = np.linspace(-1.5, 1.5, 7)
        self.exact = np.exp(-self.x**2 / 4) / math.sqrt(2)

    @pytest.mark.parametrize("mode", ["partial", "cesaro", "dvp"])
    def test_modes_converge(self, mode):
        N = 8
        err = np.max(np.abs(ch.reconstruct(self.basis, self.c, self.x, N, mode) - self.exact))
        assert err < 0.05

    def test_partial_error_falls(self):
        errs = [np.max(np.abs(ch.reconstruct(self.basis, self.c, self.x, N) - self.exact))
                for N in (2, 6, 12, 16)]
        assert all(a > b for a, b in zip(errs, errs[1:]))
        assert errs[-1] < 1e-5

    def test_degree_limits(self):
        with pytest.raises(DegreeOutOfRange):
            ch.reconstruct(self.basis, self.c, 0.0, 9, "dvp")
        with pytest.raises(DegreeOutOfRange):
            ch.basis_function(self.basis, 17, 0.0)
        with pytest.raises(DegreeOutOfRange):
            ch.build_basis(kernels.laplace(), None, 0.0, -1)


class TestKernelExpansion:
    @pytest.mark.parametrize("make,x,y", [
        (lambda: ch.build_basis(kernels.laplace(), op.laguerre(0.0), 1.0, 16), 2.5, 2.0),
        (lambda: ch.build_basis(kernels.bargmann(), op.hermite(), 0.5, 16), 1.0, 0.3),
        (lambda: wavelet.split_basis(1, (1.25, 0.0), 16), (1.0, 0.25), 3.0),
    ], ids=["laplace", "bargmann", "wavelet"])
    def test_residual_falls(self, make, x, y):
        b = make()
        r = [ch.kernel_expansion_residual(b, x, y, N) for N in (2, 4, 8, 16)]
        assert r[-1] < r[0]
        assert r[-1] < 1e-2 * r[0]

    def test_exact_on_the_weight_itself(self):
        # at x = x0 + 1/2 the Laplace kernel is sqrt(w_x0), the zeroth basis term
        b = ch.build_basis(kernels.laplace(), op.laguerre(0.0), 1.0, 4)
        assert ch.kernel_expansion_residual(b, 1.5, 2.0, 0) < 1e-15

    def test_outside_segments(self):
        b = wavelet.split_basis(1, (1.0, 0.0), 4)
        with pytest.raises(DomainViolation):
            ch.kernel_expansion_residual(b, (1.0, 0.0), -1.0, 2)


class TestWalsh:
    def test_grid_matrix_matches_pointwise(self):
        b = ch.build_basis(kernels.walsh(4, 6), op.laguerre(0.0), 0.0, 5)
        G = ch.walsh_grid_matrix(b)[0]
        t = (np.array([0, 3, 17, 63]) + 0.5) * 2.0**-4
        mats, _ = ch.basis_matrix(b, t)
        np.testing.assert_allclose(G[:, [0, 3, 17, 63]], mats[0], atol=1e-13)

    def test_grid_matrix_needs_walsh(self):
        b = ch.build_basis(kernels.laplace(), op.laguerre(0.0), 0.0, 2)
        with pytest.raises(KernelMismatch):
            ch.walsh_grid_matrix(b)
