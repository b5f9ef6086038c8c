"""Transform kernels, their sign structure and numerical evaluation of the inverse transform.

A kernel acts as ``I(h)(x) = int h(y) conj(Psi(x, y)) dy``.  Points x are
real numbers except for the Poisson wavelet, whose points are pairs (a, b).
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _poisson, dyadic, quad
from .errors import (
    DomainViolation,
    ParameterInfeasible,
    ParameterOutOfRange,
    UnsupportedPoint,
)
from .orthopoly import HALF_LINE, REAL_LINE, Interval, QuadratureRule

SQRT2 = math.sqrt(2.0)
_FOURIER_C = 1.0 / math.sqrt(2.0 * math.pi)
_BARGMANN_C = math.pi**-0.25


class WaveletPoint(NamedTuple):
    a: float
    b: float


class HalfPlanes(NamedTuple):
    """Point set ``{(a, b): a != 0}`` of the wavelet transform."""

    def contains(self, pts):
        return np.asarray(pts)[..., 0] != 0


@dataclass(frozen=True)
class KernelModel:
    name: str
    x_domain: object
    y_domain: Interval
    real: bool
    quadrature_hint: str
    operator_note: str
    params: tuple = ()
    measure: str = "lebesgue"

    @property
    def point_dim(self):
        return 2 if self.name == "poisson" else 1

    @property
    def order(self):
        """Wavelet order n of a Poisson kernel."""
        return self.params[0]

    def points(self, x):
        """Flat point array, (X,) or (X, 2), plus the caller's point shape."""
        arr = np.asarray(x, dtype=float)
        if self.point_dim == 2:
            if arr.shape[-1:] != (2,):
                raise DomainViolation("wavelet points are (a, b) pairs")
            shape = arr.shape[:-1]
            flat = arr.reshape(-1, 2)
        else:
            shape = arr.shape
            flat = arr.reshape(-1)
        if not np.all(self.x_domain.contains(flat)):
            raise DomainViolation(f"point outside the x-domain of the {self.name} kernel")
        return flat, shape

    def matrix(self, x, y):
        """Kernel values ``Psi(x_i, y_j)`` for flat points x and nodes y, shape (X, J)."""
        y = np.asarray(y, dtype=float)
        if self.name == "fourier":
            return np.exp(-1j * np.multiply.outer(x, y)) * _FOURIER_C
        if self.name == "laplace":
            return np.exp(-np.multiply.outer(x, y))
        if self.name == "bargmann":
            return _BARGMANN_C * np.exp(-0.5 * (x[:, None] ** 2 + y[None, :] ** 2)
                                        + SQRT2 * np.multiply.outer(x, y))
        if self.name == "walsh":
            return _walsh_matrix(x, y, *self.params)
        if self.name == "poisson":
            return _poisson.u_kernel(self.order, x[:, 0, None], x[:, 1, None], y[None, :])
        raise ValueError(f"unknown kernel {self.name}")

    def log_abs_max(self, x, y):
        """``max_i log|Psi(x_i, y)|`` over the given points, used to size quadrature tails."""
        y = np.asarray(y, dtype=float)
        if self.name in ("fourier", "walsh"):
            return np.full(y.shape, math.log(_FOURIER_C) if self.name == "fourier" else 0.0)
        sample = x if x.shape[0] <= 64 else x[np.unique(np.linspace(0, len(x) - 1, 64).astype(int))]
        if self.name == "laplace":
            return -np.min(sample) * y
        if self.name == "bargmann":
            lo, hi = np.min(sample), np.max(sample)
            e = lambda z: -0.5 * (z * z + y * y) + SQRT2 * z * y
            best = np.maximum(e(lo), e(hi))
            inner = np.clip(SQRT2 * y, lo, hi)
            return math.log(_BARGMANN_C) + np.maximum(best, e(inner))
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.matrix(sample, y))).max(axis=0)

    def support(self, x0):
        """Interval of y where ``Psi(x0, .)`` can be nonzero."""
        if self.name == "poisson":
            a0, b0 = _point(x0)
            return Interval(b0, np.inf) if a0 > 0 else Interval(-np.inf, b0)
        return self.y_domain

    def __call__(self, x, y):
        return kernel_eval(self, x, y)


def _point(x0):
    a0, b0 = (float(v) for v in x0)
    if a0 == 0:
        raise DomainViolation("wavelet scale a must be nonzero")
    return a0, b0


def _walsh_matrix(t, y, M_int, m_frac):
    """Exact generalized Walsh values for y in [0, 2**M_int) and t in [0, 2**m_frac)."""
    if np.any(y < 0) or np.any(y >= 2.0**M_int):
        raise DomainViolation(f"Walsh frequencies must lie in [0, 2**{M_int})")
    if np.any(t < 0) or np.any(t >= 2.0**m_frac):
        raise DomainViolation(f"Walsh arguments must lie in [0, 2**{m_frac})")
    nbits = M_int + m_frac
    ycode = np.floor(np.ldexp(y, m_frac)).astype(np.int64)
    tcode = np.floor(np.ldexp(t, M_int)).astype(np.int64)
    mask = dyadic.bit_reverse(tcode, nbits)
    parity = np.bitwise_count(ycode[None, :] & mask[:, None]) & 1
    return 1.0 - 2.0 * parity.astype(float)


def fourier():
    return KernelModel("fourier", REAL_LINE, REAL_LINE, False, "oscillatory",
                       "L_x = -i d/dx")


def laplace():
    return KernelModel("laplace", HALF_LINE, HALF_LINE, True, "gauss", "L_x = -d/dx")


def bargmann():
    return KernelModel("bargmann", REAL_LINE, REAL_LINE, True, "gauss",
                       "L_z = (d/dz + z)/sqrt(2)")


def walsh(M_int=dyadic.DEFAULT_M_INT, m_frac=dyadic.DEFAULT_M_FRAC):
    return KernelModel("walsh", HALF_LINE, HALF_LINE, True, "dyadic",
                       "dyadic derivative", (int(M_int), int(m_frac)))


def poisson_wavelet(n=1):
    n = _poisson.check_order(n)
    return KernelModel("poisson", HalfPlanes(), REAL_LINE, True, "wavelet",
                       f"D^({n})_(a,b)", (n,))


KERNELS = {"fourier": fourier, "laplace": laplace, "bargmann": bargmann,
           "walsh": walsh, "poisson": poisson_wavelet}


def kernel_eval(K, x, y):
    """Closed-form ``Psi(x, y)`` with x and y broadcast against each other."""
    y = np.asarray(y, dtype=float)
    xs, shape = K.points(x)
    if not np.all(K.y_domain.contains(y)):
        raise DomainViolation(f"y outside the y-domain of the {K.name} kernel")
    full = K.matrix(xs, y.reshape(-1))
    if xs.shape[0] == 1:
        out = full[0].reshape(y.shape)
    elif y.size == 1:
        out = full[:, 0].reshape(shape)
    elif shape == y.shape:
        out = np.diagonal(full).reshape(shape)
    else:
        raise DomainViolation("x and y shapes do not broadcast")
    return out.item() if out.ndim == 0 else out


def sign_changes(K, x0):
    """Sorted y locations where ``Psi(x0, .)`` changes sign."""
    if K.name in ("laplace", "bargmann"):
        K.points(x0)
        return np.empty(0)
    if K.name in ("fourier", "walsh"):
        if float(x0) != 0.0:
            raise UnsupportedPoint(f"the {K.name} kernel has no finite sign structure at x0={x0}")
        return np.empty(0)
    a0, b0 = _point(x0)
    return np.array([b0 + a0 * K.order])


def _transform_rule(K, h, xs, rule, weight):
    if weight is None:
        raise ParameterOutOfRange("a quadrature rule needs the weight it was built for")
    y = rule.nodes
    vals = np.asarray(h(y)) / weight(y) * rule.weights
    return vals @ np.conj(K.matrix(xs, y)).T, math.nan


def transform(K, h, x, quad_spec=None, *, weight=None, breakpoints=(), rtol=1e-11,
              atol=1e-14, max_level=7, chunk=256, tail_tol=1e-8):
    """``int h(y) conj(Psi(x, y)) dy`` with an error estimate.

    ``quad_spec`` may be a QuadratureRule (then ``weight`` is the weight it was
    built for and h/weight is integrated by the rule) or None for adaptive
    panel refinement.  Returns ``(value, err)``; value has the point shape of x.
    """
    xs, shape = K.points(x)
    if K.name == "walsh":
        M_int, m_frac = K.params
        value, err = dyadic.walsh_transform(h, xs, m_frac=m_frac, M_int=M_int,
                                            tail_tol=tail_tol)
    elif K.name == "poisson":
        value, err = _poisson.transform(h, K.order, xs[:, 0], xs[:, 1],
                                        breakpoints=breakpoints)
    elif isinstance(quad_spec, QuadratureRule):
        value, err = _transform_rule(K, h, xs, quad_spec, weight)
    else:
        value, err = _transform_adaptive(K, h, xs, breakpoints, rtol, atol, max_level, chunk)
    value = np.asarray(value).reshape(np.shape(value)[:-1] + shape)
    return (value.item() if value.ndim == 0 else value), err


def _transform_adaptive(K, h, xs, breakpoints, rtol, atol, max_level, chunk):
    lo, hi = K.y_domain.lo, K.y_domain.hi
    out, err = [], 0.0
    for s in range(0, xs.shape[0], chunk):
        xc = xs[s:s + chunk]
        max_panel = math.pi / (1.0 + np.max(np.abs(xc))) if K.name == "fourier" else np.inf

        def fn(y, xc=xc):
            return np.asarray(h(y))[..., None, :] * np.conj(K.matrix(xc, y))

        def profile(y, xc=xc):
            with np.errstate(divide="ignore"):
                hv = np.abs(np.asarray(h(y)))
                hv = hv.reshape(-1, hv.shape[-1]).max(axis=0) if hv.ndim > 1 else hv
                return np.log(hv) + K.log_abs_max(xc, y)

        v, e = quad.integrate(fn, lo, hi, log_profile=profile, breakpoints=breakpoints,
                              rtol=rtol, atol=atol, max_level=max_level,
                              max_panel=max_panel)
        out.append(v)
        err = max(err, float(e))
    return np.concatenate(out, axis=-1), err


def _lp_norm(values, weights, p):
    values = np.abs(values)
    if np.isinf(p):
        return float(values.max())
    return float(np.sum(values**p * weights) ** (1.0 / p))


def bargmann_young_bound(f, p, q, breakpoints=(), z_window=(-12.0, 12.0), panels=96):
    """Both sides of the Young-type bound for the one-dimensional Bargmann transform.

    ``lhs = || pi**-0.5 F(z) exp(-z**2/2) ||_r`` with F the transform of f and
    ``rhs = 2**(-1/(2r)) pi**-0.5 ||f||_p ||g||_q``, g(u) = (4/pi)**0.25 exp(-u**2/2),
    ``1/r = 1/p - 1/q'``.
    """
    if not (1 <= p <= np.inf and 1 <= q <= np.inf):
        raise ParameterInfeasible("exponents must lie in [1, inf]")
    inv_qp = 1.0 - 1.0 / q
    inv_r = 1.0 / p - inv_qp
    if inv_r < -1e-15 or inv_r > 1:
        raise ParameterInfeasible(f"p={p}, q={q} violate p <= q'")
    r = np.inf if inv_r <= 1e-15 else 1.0 / inv_r
    K = bargmann()
    bp = tuple(breakpoints)

    def fabs_profile(y):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(f(y)))

    # ||f||_p
    if np.isinf(p):
        grid = np.linspace(-40, 40, 200001)
        fnorm = float(np.max(np.abs(f(grid))))
    else:
        fnorm, _ = quad.integrate(lambda y: np.abs(f(y)) ** p, -np.inf, np.inf,
                                  log_profile=lambda y: p * fabs_profile(y), breakpoints=bp,
                                  rtol=1e-10, log_eps=math.log(1e-16))
        fnorm = float(fnorm) ** (1.0 / p)
    gmax = (4.0 / math.pi) ** 0.25
    gnorm = gmax if np.isinf(q) else gmax * (2.0 * math.pi / q) ** (0.5 / q)
    rhs = 2.0 ** (-0.5 * inv_r) * math.pi**-0.5 * fnorm * gnorm
    if fnorm == 0.0:
        return 0.0, 0.0
    z, wz = quad.rule_from_breaks(np.linspace(*z_window, panels + 1))
    F, _ = transform(K, f, z, breakpoints=bp, rtol=1e-10)
    vals = math.pi**-0.5 * np.abs(F) * np.exp(-0.5 * z * z)
    return _lp_norm(vals, wz, r), rhs
