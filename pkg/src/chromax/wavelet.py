"""Poisson wavelet transform, its chromatic expansion in the (a, b) half-planes and checks."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import chromatic, kernels, quad
from ._poisson import (  # noqa: F401  re-exported
    check_order,
    derivative_polys,
    poisson_psi,
    poisson_q,
    psi_derivative,
    support_length,
)
from .errors import ParameterOutOfRange


def u_kernel(n, pt, y):
    """``|a|**-0.5 Psi_n((y - b)/a)`` at the point ``pt = (a, b)``."""
    a, b = float(pt[0]), float(pt[1])
    if a == 0:
        raise ParameterOutOfRange("wavelet scale a must be nonzero")
    return kernels.kernel_eval(kernels.poisson_wavelet(n), (a, b), y)


def wavelet_transform(h, n, points, *, breakpoints=(), panels=8):
    """``W h(a, b)`` at an array of (a, b) pairs (shape (..., 2)); returns ``(values, err)``."""
    K = kernels.poisson_wavelet(n)
    return kernels.transform(K, h, points, breakpoints=breakpoints)


def psi_integral(n):
    """``int Psi_n``; zero for every order."""
    check_order(n)
    v, _ = quad.integrate(lambda y: poisson_psi(n, y), 0.0, np.inf, breakpoints=(float(n),),
                          rtol=1e-14, atol=1e-17)
    return float(v)


def psi_fourier(n, omega, *, order=20):
    """``int Psi_n(y) exp(-i omega y) dy`` by composite Gauss rules, panels resolving the phase."""
    n = check_order(n)
    omega = np.asarray(omega, dtype=float)
    T = support_length(n)
    width = min(1.0, math.pi / (1.0 + float(np.max(np.abs(omega)))))
    breaks = np.linspace(0.0, T, int(math.ceil(T / width)) + 1)
    y, w = quad.rule_from_breaks(breaks, order)
    vals = poisson_psi(n, y) * w
    return np.exp(-1j * np.multiply.outer(omega, y)) @ vals


def psi_fourier_closed(n, omega):
    """Closed form ``-i omega (1 + i omega)**(-n-1)`` of the same integral."""
    omega = np.asarray(omega, dtype=float)
    return -1j * omega * (1.0 + 1j * omega) ** (-n - 1)


def admissibility_numeric(n, *, k_range=(-10, 10), order=20):
    """``int |F Psi_n(omega)|**2 / |omega| d omega`` over the whole line.

    The transform is computed by quadrature of Psi_n (not the closed form) on
    dyadic bands ``[2**k, 2**(k+1)]``; bands below and above the range are
    dropped, which costs about ``2**(2*k_lo) + 2**(-2*k_hi*n)``.
    """
    n = check_order(n)
    x, w = quad.gauss_legendre(order)
    total = 0.0
    for k in range(k_range[0], k_range[1] + 1):
        lo, hi = 2.0**k, 2.0 ** (k + 1)
        om = lo + 0.5 * (hi - lo) * (x + 1.0)
        F = psi_fourier(n, om)
        total += float(np.sum(0.5 * (hi - lo) * w * np.abs(F) ** 2 / om))
    # the integrand is even in omega
    return 2.0 * total


def sign_change(n, pt):
    """The zero of ``u_n(a, b, .)`` inside its support, located by bracketing."""
    n = check_order(n)
    a, b = float(pt[0]), float(pt[1])
    T = support_length(n)

    def fn(y):
        # the scale factor does not move the zero
        return float(poisson_psi(n, (y - b) / a))

    ends = sorted((b + a * 1e-3, b + a * T))
    return optimize.brentq(fn, ends[0], ends[1], xtol=1e-15, rtol=4 * np.finfo(float).eps,
                           maxiter=500)


def binomial_identity_residual(n, y):
    """``|sum_k binom(n+1, k) Psi_n^(k)(y)|`` from the exact derivative polynomials."""
    n = check_order(n)
    y = np.asarray(y, dtype=float)
    total = np.zeros_like(y)
    for k in range(n + 2):
        total = total + math.comb(n + 1, k) * psi_derivative(n, k, y)
    return np.abs(total)


def _partials(n, a, b, y, k):
    """``d^k u / db^k`` and ``d^(k+1) u / da db^k`` in closed form."""
    t = (y - b) / a
    scale = abs(a) ** -0.5
    dk = psi_derivative(n, k, t)
    dk1 = psi_derivative(n, k + 1, t)
    ub = scale * (-1.0 / a) ** k * dk
    uab = ((-1.0) ** (k + 1) * (k + 0.5) * scale * a ** (-k - 1) * dk
           - (-1.0) ** k * scale * a ** (-k) * (y - b) / a**2 * dk1)
    return ub, uab


def _fd_partials(a, b, y, k, h):
    """Central finite differences for n = 1, k in {0, 1}."""
    def u(a_, b_):
        return u_kernel(1, (a_, b_), y)

    if k == 0:
        return u(a, b), (u(a + h, b) - u(a - h, b)) / (2 * h)
    ub = (u(a, b + h) - u(a, b - h)) / (2 * h)
    uab = (u(a + h, b + h) - u(a + h, b - h) - u(a - h, b + h) + u(a - h, b - h)) / (4 * h * h)
    return ub, uab


def operator_apply(n, pt, y, *, method="exact", h=1e-4):
    """``D_ab u_n(a, b, y)`` with partials in closed form or by finite differences (n = 1)."""
    n = check_order(n)
    if method == "fd" and n != 1:
        raise ParameterOutOfRange("finite-difference operator check is implemented for n = 1")
    a, b = float(pt[0]), float(pt[1])
    y = np.asarray(y, dtype=float)
    total = b * u_kernel(n, (a, b), y)
    for k in range(1, n + 2):
        if method == "fd":
            ub, uab = _fd_partials(a, b, y, k - 1, h)
        else:
            ub, uab = _partials(n, a, b, y, k - 1)
        total = total + math.comb(n + 1, k) * (-1.0) ** (k + 1) * a**k * (
            a * uab + 0.5 * (2 * k - 1) * ub)
    return total


def identity_residuals(n, pt, y, operator=None, h=1e-4):
    """Residuals of the derivative identity and, optionally, of ``D u = y u``.

    ``operator`` is None, ``"exact"`` or ``"fd"``; returns ``(binomial, op or None)``
    as maxima over y.
    """
    y = np.asarray(y, dtype=float)
    t = (y - float(pt[1])) / float(pt[0])
    binom = float(np.max(binomial_identity_residual(n, t)))
    if operator is None:
        return binom, None
    lhs = operator_apply(n, pt, y, method=operator, h=h)
    rhs = y * u_kernel(n, pt, y)
    return binom, float(np.max(np.abs(lhs - rhs)))


def split_basis(n, x0, N_max, weights=None):
    """Chromatic basis of the wavelet transform at ``x0 = (a0, b0)``, one system per side."""
    return chromatic.build_basis(kernels.poisson_wavelet(n), weights, x0, N_max)


def wavelet_partial_sum(basis, c, points, N):
    """``S_N(a, b) = sum_i sum_{m<=N} c_m^(i) phi_m^(i)(a, b)``."""
    return chromatic.reconstruct(basis, c, points, N)


@dataclass(frozen=True)
class WaveletWindow:
    """Tensor Gauss grid on ``a in a_range`` (and its mirror if symmetric), ``b in b_range``.

    The a-panels are uniform in log a.
    """

    a_range: tuple = (0.25, 4.0)
    b_range: tuple = (-2.0, 8.0)
    a_panels: int = 8
    b_panels: int = 12
    order: int = 8
    symmetric: bool = False

    def grid(self):
        """``(points of shape (P, 2), weights for db da / a**2)``."""
        la, lw = quad.rule_from_breaks(
            np.linspace(math.log(self.a_range[0]), math.log(self.a_range[1]), self.a_panels + 1),
            self.order)
        a = np.exp(la)
        wa = lw / a  # da / a**2 = dlog(a) / a
        if self.symmetric:
            a, wa = np.concatenate([-a[::-1], a]), np.concatenate([wa[::-1], wa])
        b, wb = quad.rule_from_breaks(np.linspace(*self.b_range, self.b_panels + 1), self.order)
        A, B = np.meshgrid(a, b, indexing="ij")
        W = np.outer(wa, wb)
        return np.stack([A.ravel(), B.ravel()], axis=-1), W.ravel()


def default_window(n, x0, symmetric=False):
    a0, b0 = float(x0[0]), float(x0[1])
    return WaveletWindow((0.25, 4.0), (-2.0, b0 + abs(a0) * n + 6.0), symmetric=symmetric)


def _parseval_factor(n, symmetric):
    # int_{a>0} |F Psi_n(a w)|**2 da/a = 1/(2n), so a one-sided window needs twice the factor
    return float(n) if symmetric else 2.0 * n


def wavelet_domain_norm(values, n, weights, symmetric=False):
    """``sqrt(c * sum |h|**2 w)`` on a window grid, c = n (both signs of a) or 2n (a > 0)."""
    return math.sqrt(_parseval_factor(n, symmetric) * float(np.sum(np.abs(values) ** 2 * weights)))


def wavelet_inner(u, v, n, weights, symmetric=False):
    """``c * sum u conj(v) w`` on a window grid with the factor of wavelet_domain_norm."""
    return _parseval_factor(n, symmetric) * complex(np.sum(u * np.conj(v) * weights)).real


def windowed_coefficients(basis, fhat, window, N=None, *, breakpoints=()):
    """Coefficients recovered as ``c * <W f, phi_m^(i)>`` over the window, per segment.

    Exact only in the limit of an unbounded window; the neglected mass decays slowly in a.
    """
    n = basis.kernel.order
    N = basis.N_max if N is None else N
    pts, wts = window.grid()
    mats, _ = chromatic.basis_matrix(basis, pts, N)
    W, _ = wavelet_transform(fhat, n, pts, breakpoints=tuple(breakpoints))
    c = _parseval_factor(n, window.symmetric)
    return [c * (np.conj(mat) @ (W * wts)).real for mat in mats]


def waviness(n, pt, y_window=None, samples=4001):
    """Number of sign changes of ``u_n(a, b, .)`` on a fine grid inside its support."""
    a, b = float(pt[0]), float(pt[1])
    T = support_length(n)
    lo, hi = y_window or sorted((b + 1e-9 * a, b + a * T))
    y = np.linspace(lo, hi, samples)
    v = u_kernel(n, (a, b), y)
    s = np.sign(v[np.abs(v) > 1e-300])
    return int(np.count_nonzero(s[1:] != s[:-1]))
