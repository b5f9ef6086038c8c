"""Poisson wavelet closed forms and a vectorized (a, b)-plane transform.

Substituting ``y = b + a t`` turns the wavelet transform into

    W h(a, b) = |a|**0.5 * int_0^inf h(b + a t) Psi_n(t) dt,

an integral over the fixed support of ``Psi_n`` for every (a, b).
"""

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import quad
from .errors import ParameterOutOfRange


def check_order(n):
    if int(n) != n or n < 1:
        raise ParameterOutOfRange(f"wavelet order must be an integer >= 1, got {n}")
    return int(n)


def poisson_q(n, y):
    """``y**n exp(-y) / n!`` for y >= 0, zero for y < 0."""
    n = check_order(n)
    y = np.asarray(y, dtype=float)
    t = np.maximum(y, 0.0)
    with np.errstate(over="ignore", invalid="ignore"):
        v = np.exp(n * np.log(np.where(t > 0, t, 1.0)) - t - math.lgamma(n + 1))
    return np.where(y > 0, v, 0.0)


def poisson_psi(n, y):
    """``(y - n) y**(n-1) exp(-y) / n!`` for y >= 0, zero for y < 0."""
    n = check_order(n)
    y = np.asarray(y, dtype=float)
    t = np.maximum(y, 0.0)
    with np.errstate(over="ignore", invalid="ignore"):
        mag = np.exp((n - 1) * np.log(np.where(t > 0, t, 1.0)) - t - math.lgamma(n + 1))
    v = (t - n) * mag
    if n == 1:
        return np.where(y >= 0, v, 0.0)
    return np.where(y > 0, v, 0.0)


def log_abs_psi(n, y):
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.log(np.abs(y - n)) + (n - 1) * np.log(y) - y - math.lgamma(n + 1)
    return np.where(y > 0, v, -np.inf)


@lru_cache(maxsize=None)
def derivative_polys(n, kmax):
    """Exact coefficients (ascending powers) of P_k with Psi_n^(k)(y) = P_k(y) exp(-y), y > 0."""
    n = check_order(n)
    p = [Fraction(0)] * (n + 1)
    p[n] = Fraction(1, math.factorial(n))
    p[n - 1] = Fraction(-n, math.factorial(n))
    out = [tuple(p)]
    for _ in range(kmax):
        deriv = [i * p[i] for i in range(1, len(p))] + [Fraction(0)]
        p = [d - c for d, c in zip(deriv, p)]
        out.append(tuple(p))
    return tuple(out)


def psi_derivative(n, k, y):
    """``Psi_n^(k)(y)`` for y > 0 from the exact derivative polynomials."""
    coeffs = np.array([float(c) for c in derivative_polys(n, k)[k]])
    y = np.asarray(y, dtype=float)
    return np.polynomial.polynomial.polyval(y, coeffs) * np.exp(-y)


def u_kernel(n, a, b, y):
    """``|a|**-0.5 Psi_n((y - b)/a)`` with broadcasting over a, b, y."""
    a = np.asarray(a, dtype=float)
    return poisson_psi(n, (np.asarray(y, dtype=float) - b) / a) / np.sqrt(np.abs(a))


@lru_cache(maxsize=None)
def support_length(n, log_eps=-60.0):
    """t beyond which ``t**(n+2) exp(-t) / n!`` stays below ``exp(log_eps)``."""
    t = float(n + 2)
    while (n + 2) * math.log(t) - t - math.lgamma(n + 1) > log_eps:
        t *= 1.25
    return t


def _piece_nodes(breaks, panels, order):
    """Gauss-Legendre nodes/weights on ``panels`` uniform panels of every piece.

    ``breaks`` has shape (P, K+1); returns arrays of shape (P, K*panels*order).
    """
    x, w = quad.gauss_legendre(order)
    lo = breaks[:, :-1, None]
    hi = breaks[:, 1:, None]
    frac = np.arange(panels) / panels
    plo = lo + (hi - lo) * frac[None, None, :]
    width = (hi - lo) / panels
    nodes = plo[..., None] + 0.5 * width[..., None] * (x + 1.0)
    weights = 0.5 * width[..., None] * w
    weights = np.broadcast_to(weights, nodes.shape)
    npts = breaks.shape[0]
    return nodes.reshape(npts, -1), weights.reshape(npts, -1)


def transform(h, n, a, b, breakpoints=(), panels=8, order=20, chunk=256):
    """Wavelet transform of ``h`` at the points (a[i], b[i]).

    ``h`` maps an array of y values to values with optional leading axes.
    ``breakpoints`` are y locations where h is not smooth.  Returns
    ``(values, err)`` where values has shape (..., len(a)) and ``err`` is the
    largest change between ``panels`` and ``2*panels`` per piece.
    """
    n = check_order(n)
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    if np.any(a == 0):
        raise ParameterOutOfRange("wavelet scale a must be nonzero")
    a = a.ravel()
    b = b.ravel()
    T = support_length(n)
    bp = np.asarray(sorted(breakpoints), dtype=float)
    results, err = [], 0.0
    for s in range(0, a.size, chunk):
        ac, bc = a[s:s + chunk], b[s:s + chunk]
        tb = np.clip((bp[None, :] - bc[:, None]) / ac[:, None], 0.0, T)
        breaks = np.sort(np.concatenate(
            [np.zeros((ac.size, 1)), tb, np.full((ac.size, 1), T)], axis=1), axis=1)
        vals = []
        for p in (panels, 2 * panels):
            t, wt = _piece_nodes(breaks, p, order)
            kern = poisson_psi(n, t) * wt * np.sqrt(np.abs(ac))[:, None]
            hv = np.asarray(h(bc[:, None] + ac[:, None] * t))
            vals.append(np.sum(hv * kern, axis=-1))
        err = max(err, float(np.max(np.abs(vals[1] - vals[0]), initial=0.0)))
        results.append(vals[1])
    return np.concatenate(results, axis=-1), err
