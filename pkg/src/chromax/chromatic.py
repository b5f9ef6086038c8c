"""Chromatic derivatives and expansions around a point x0 with point-dependent weights.

The weight at x0 is ``w(y) * Psi(x0, y)**2``.  When ``Psi(x0, .)`` changes sign
the y-domain is split at the sign changes and every segment carries its own
weight, orthonormal polynomials and coefficient vector; expansions add the
segment series.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gamma

from . import dyadic, kernels, orthopoly, quad, _poisson
from .errors import (
    DegreeOutOfRange,
    DomainViolation,
    KernelMismatch,
    ParameterOutOfRange,
    QuadratureNonConvergence,
)
from .orthopoly import Interval, WeightSpec

_LOG_FOURIER_MASS = -math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Segment:
    interval: Interval
    sign: int
    weight: WeightSpec
    base: WeightSpec
    rec: orthopoly.Recurrence
    quad: orthopoly.QuadratureRule
    modulus: Callable = field(compare=False, repr=False)

    def sqrt_weight(self, y):
        """``sqrt(base(y)) * |Psi(x0, y)|`` on the open segment, zero elsewhere."""
        y = np.asarray(y, dtype=float)
        iv = self.interval
        inside = (y > iv.lo) & (y < iv.hi)
        with np.errstate(all="ignore"):
            v = np.sqrt(self.base(y)) * self.modulus(y)
        return np.where(inside, v, 0.0)

    def sqrt_base(self, y):
        y = np.asarray(y, dtype=float)
        iv = self.interval
        inside = (y > iv.lo) & (y < iv.hi)
        with np.errstate(all="ignore"):
            v = np.sqrt(self.base(y))
        return np.where(inside, v, 0.0)

    def breaks(self):
        iv = self.interval
        return tuple(v for v in (iv.lo, iv.hi) if np.isfinite(v)) + tuple(self.weight.breakpoints)


@dataclass(frozen=True, eq=False)
class ChromaticBasis:
    kernel: kernels.KernelModel
    base_weights: tuple
    x0: object
    segments: tuple
    N_max: int
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def split(self):
        return len(self.segments) > 1


@dataclass(frozen=True)
class ChromaticCoefficients:
    values: tuple
    err: float = 0.0

    @property
    def N(self):
        return min(v.size for v in self.values) - 1

    def __getitem__(self, i):
        return self.values[i]


def flat_weight(interval):
    """The constant weight 1 on an interval."""
    return orthopoly.generic(lambda y: np.ones_like(y), interval, lambda y: np.zeros_like(y),
                             name="flat")


def affine_recurrence(rec, mu, sigma, c, interval):
    """Recurrence of ``c * w(sigma*(y - mu))`` given the recurrence of w."""
    alpha = mu + rec.alpha / sigma
    beta = rec.beta / sigma**2
    beta[0] = c * rec.beta[0] / sigma
    return orthopoly.Recurrence(alpha, beta, interval)


def _base_recurrence(base, n, discretization):
    if base.family in ("hermite", "laguerre", "scaled_laguerre", "jacobi"):
        return orthopoly.classical_recurrence(base, n)
    return orthopoly.stieltjes_recurrence(base, n, discretization)


def _scaled_mass(rec, c):
    beta = rec.beta.copy()
    beta[0] *= c
    return orthopoly.Recurrence(rec.alpha.copy(), beta, rec.interval)


def _closed_form(K, base, x0, n, discretization):
    """Closed-form recurrence (and family weight, if any) for the point weight, or None."""
    if K.name == "laplace" and base.family in ("laguerre", "scaled_laguerre"):
        a = base.params[0]
        s = base.params[1] if base.family == "scaled_laguerre" else 1.0
        w = orthopoly.scaled_laguerre(a, s + 2.0 * float(x0))
        return orthopoly.classical_recurrence(w, n), w
    if K.name in ("fourier", "walsh") or (K.name == "laplace" and float(x0) == 0.0):
        c = 1.0 / (2.0 * math.pi) if K.name == "fourier" else 1.0
        return _scaled_mass(_base_recurrence(base, n, discretization), c), None
    if K.name == "bargmann" and base.family == "hermite":
        z0 = float(x0)
        rec = affine_recurrence(orthopoly.classical_recurrence(base, n), z0 / math.sqrt(2.0),
                                math.sqrt(2.0), math.pi**-0.5, base.interval)
        return rec, None
    return None


def _segments_of(K, x0):
    cuts = kernels.sign_changes(K, x0)
    sup = K.support(x0)
    edges = [sup.lo] + [float(c) for c in cuts] + [sup.hi]
    return [Interval(a, b) for a, b in zip(edges[:-1], edges[1:])]


def _probe(iv):
    if iv.finite:
        return 0.5 * (iv.lo + iv.hi)
    if np.isfinite(iv.lo):
        return iv.lo + 1.0
    if np.isfinite(iv.hi):
        return iv.hi - 1.0
    return 0.0


def _modulus(K, x0):
    xs, _ = K.points(x0)

    def modulus(y):
        y = np.asarray(y, dtype=float)
        return np.abs(K.matrix(xs, y.reshape(-1))[0]).reshape(y.shape)

    def log_modulus(y):
        with np.errstate(divide="ignore"):
            return np.log(modulus(y))

    if K.name == "walsh":
        modulus = lambda y: np.ones(np.shape(y))
        log_modulus = lambda y: np.zeros(np.shape(y))
    elif K.name == "laplace":
        log_modulus = lambda y, x=float(xs[0]): -x * np.asarray(y, dtype=float)
    elif K.name == "bargmann":
        z = float(xs[0])
        log_modulus = lambda y, z=z: (-0.25 * math.log(math.pi)
                                      - 0.5 * (z * z + np.asarray(y) ** 2) + math.sqrt(2) * z * np.asarray(y))
    elif K.name == "poisson":
        a0, b0 = float(xs[0, 0]), float(xs[0, 1])
        n = K.order
        log_modulus = lambda y: (_poisson.log_abs_psi(n, (np.asarray(y, dtype=float) - b0) / a0)
                                 - 0.5 * math.log(abs(a0)))
    elif K.name == "fourier":
        log_modulus = lambda y: np.full(np.shape(y), 0.5 * _LOG_FOURIER_MASS)
    return modulus, log_modulus


def build_basis(K, base_weights, x0, N_max, *, discretization=None):
    """Segments, point weights, recurrences and Gauss rules for the expansion at x0.

    ``base_weights`` is a WeightSpec (used on every segment), a sequence with one
    WeightSpec per segment, or None for the flat weight 1.
    """
    if N_max < 0:
        raise DegreeOutOfRange("N_max must be nonnegative")
    intervals = _segments_of(K, x0)
    if base_weights is None or isinstance(base_weights, WeightSpec):
        bases = [base_weights] * len(intervals)
    else:
        bases = list(base_weights)
        if len(bases) != len(intervals):
            raise ParameterOutOfRange(f"{len(intervals)} segments need {len(intervals)} weights")
    modulus, log_modulus = _modulus(K, x0)
    xs, _ = K.points(x0)
    n_rec = 2 * N_max + 4
    segments = []
    for iv, base in zip(intervals, bases):
        base = flat_weight(iv) if base is None else base
        lo, hi = max(iv.lo, base.interval.lo), min(iv.hi, base.interval.hi)
        if not lo < hi:
            raise ParameterOutOfRange(f"weight {base!r} does not meet segment ({iv.lo}, {iv.hi})")
        iv = Interval(lo, hi)
        sign = int(np.sign(K.matrix(xs, np.array([_probe(iv)]))[0, 0].real))
        closed = _closed_form(K, base, x0, n_rec, discretization) if len(intervals) == 1 else None

        def evaluator(y, base=base):
            return base(y) * modulus(y) ** 2

        def log_evaluator(y, base=base):
            return base.log(y) + 2.0 * log_modulus(y)

        weight = orthopoly.generic(evaluator, iv, log_evaluator, base.breakpoints,
                                   name=f"{K.name}-point-weight")
        if closed is not None:
            rec, family_weight = closed
            if family_weight is not None:
                weight = family_weight
            rec = orthopoly.Recurrence(rec.alpha, rec.beta, iv)
        else:
            rec = orthopoly.stieltjes_recurrence(weight, n_rec, discretization)
        rule = orthopoly.gauss_rule(rec, n_rec)
        segments.append(Segment(iv, sign, weight, base, rec, rule, modulus))
    return ChromaticBasis(K, tuple(bases), x0, tuple(segments), int(N_max))


def _check_degree(basis, m):
    if m < 0 or m > basis.N_max:
        raise DegreeOutOfRange(f"degree {m} outside 0..{basis.N_max}")


def segment_functions(seg, N, y):
    """``p_m(y) sqrt(w_x0(y))`` for m = 0..N on one segment, shape (N+1, *y.shape)."""
    return orthopoly.eval_orthonormal(seg.rec, N, y) * seg.sqrt_weight(y)


def chromatic_coefficients(basis, fhat, N=None, *, breakpoints=(), rtol=1e-12, atol=1e-15):
    """Coefficients ``c_m = int fhat p_m sqrt(w) |Psi(x0, .)| dy`` on every segment.

    For the Walsh kernel the integral is the dyadic midpoint sum, i.e. the
    Walsh transform at t = 0.
    """
    N = basis.N_max if N is None else N
    _check_degree(basis, N)
    values, err = [], 0.0
    for seg in basis.segments:
        if basis.kernel.name == "walsh":
            M_int, m_frac = basis.kernel.params
            y = dyadic.cell_midpoints(M_int, m_frac)
            vals = segment_functions(seg, N, y) @ (np.asarray(fhat(y)) * 2.0**-m_frac)
            e = 0.0
        else:
            iv = seg.interval
            bps = tuple(seg.weight.breakpoints) + tuple(breakpoints)
            vals, e = quad.integrate(lambda y: np.asarray(fhat(y)) * segment_functions(seg, N, y),
                                     iv.lo, iv.hi, breakpoints=bps, rtol=rtol, atol=atol)
        values.append(np.asarray(vals))
        err = max(err, float(e))
    return ChromaticCoefficients(tuple(values), err)


def chromatic_derivative_at(basis, fhat, m, x, *, breakpoints=()):
    """``sum_i int_{I_i} fhat sqrt(w_i) p_m^(i) conj(Psi(x, y)) dy``."""
    _check_degree(basis, m)
    K = basis.kernel
    total = 0.0
    for seg in basis.segments:
        def h(y, seg=seg):
            return (np.asarray(fhat(y)) * seg.sqrt_base(y)
                    * orthopoly.eval_orthonormal(seg.rec, m, y)[m])

        v, _ = kernels.transform(K, h, x, breakpoints=seg.breaks() + tuple(breakpoints))
        total = total + v
    return total


def _quad_matrix(basis, seg, xs, N, rtol=1e-11, max_level=6, chunk=512):
    K = basis.kernel
    max_panel = math.pi / (1.0 + np.max(np.abs(xs))) if K.name == "fourier" else np.inf

    def profile(y):
        with np.errstate(divide="ignore"):
            p = np.abs(orthopoly.eval_orthonormal(seg.rec, N, y)).max(axis=0)
            return np.log(p) + 0.5 * seg.weight.log(y) + K.log_abs_max(xs, y)

    iv = seg.interval
    previous, err = None, np.inf
    for level in range(max_level + 1):
        y, w = quad.layout(iv.lo, iv.hi, level, log_profile=profile,
                           breakpoints=seg.weight.breakpoints, max_panel=max_panel)
        P = segment_functions(seg, N, y) * w
        parts = [P @ np.conj(K.matrix(xs[s:s + chunk], y)).T for s in range(0, xs.shape[0], chunk)]
        value = np.concatenate(parts, axis=-1)
        if not np.iscomplexobj(K.matrix(xs[:1], y[:1])):
            value = value.real
        if previous is not None:
            err = float(np.max(np.abs(value - previous)))
            if err <= rtol * max(1.0, float(np.max(np.abs(value)))):
                return value, err
        previous = value
    raise QuadratureNonConvergence(f"basis functions did not settle (last change {err:.3g})")


def _walsh_matrix(basis, seg, xs, N):
    M_int, m_frac = basis.kernel.params
    y = dyadic.cell_midpoints(M_int, m_frac)
    P = segment_functions(seg, N, y) * 2.0**-m_frac
    return P @ basis.kernel.matrix(xs, y).T, 0.0


def _poisson_matrix(basis, seg, xs, N):
    K = basis.kernel
    return _poisson.transform(lambda y: segment_functions(seg, N, y), K.order,
                              xs[:, 0], xs[:, 1], breakpoints=seg.breaks())


def basis_matrix(basis, x, N=None):
    """Basis functions ``phi_m^(i)(x)`` for m = 0..N on every segment.

    Returns ``(list of arrays of shape (N+1, *point_shape), err)``.  Results are
    memoized per point set.
    """
    N = basis.N_max if N is None else N
    _check_degree(basis, N)
    xs, shape = basis.kernel.points(x)
    key = (N, xs.shape, xs.tobytes())
    hit = basis._cache.get(key)
    if hit is None:
        mats, err = [], 0.0
        for seg in basis.segments:
            if basis.kernel.name == "walsh":
                v, e = _walsh_matrix(basis, seg, xs, N)
            elif basis.kernel.name == "poisson":
                v, e = _poisson_matrix(basis, seg, xs, N)
            else:
                v, e = _quad_matrix(basis, seg, xs, N)
            mats.append(v)
            err = max(err, e)
        hit = (tuple(mats), err)
        basis._cache[key] = hit
    mats, err = hit
    return [m.reshape((N + 1,) + shape) for m in mats], err


def walsh_grid_matrix(basis, N=None):
    """Walsh basis functions on the whole dual grid via the fast Walsh-Hadamard transform."""
    if basis.kernel.name != "walsh":
        raise KernelMismatch("walsh_grid_matrix needs the Walsh kernel")
    N = basis.N_max if N is None else N
    M_int, m_frac = basis.kernel.params
    y = dyadic.cell_midpoints(M_int, m_frac)
    return [dyadic.walsh_transform_grid(segment_functions(seg, N, y), M_int, m_frac)
            for seg in basis.segments]


def basis_function(basis, m, x, segment=None):
    """``phi_m(x)``: summed over segments, or for one segment index."""
    _check_degree(basis, m)
    mats, _ = basis_matrix(basis, x)
    if segment is not None:
        out = mats[segment][m]
    else:
        out = sum(mat[m] for mat in mats)
    return out.item() if np.ndim(out) == 0 else out


def power_coefficients(rec, m):
    """Monomial coefficients (ascending) of the orthonormal polynomial p_m."""
    P = np.polynomial.Polynomial
    prev, cur = P([0.0]), P([1.0 / math.sqrt(rec.beta[0])])
    for k in range(m):
        nxt = (P([-rec.alpha[k], 1.0]) * cur - (math.sqrt(rec.beta[k]) if k else 0.0) * prev)
        prev, cur = cur, nxt / math.sqrt(rec.beta[k + 1])
    coef = np.zeros(m + 1)
    coef[: cur.coef.size] = cur.coef
    return coef


def laplace_basis_closed_form(basis, m, x):
    """``sum_k a_k Gamma(alpha/2 + k + 1) / (x + s/2)**(alpha/2 + k + 1)`` for p_m = sum a_k y**k.

    ``s`` is the exponential rate of the point weight ``y**alpha exp(-s y)``.
    """
    if basis.kernel.name != "laplace":
        raise KernelMismatch("closed form applies to the Laplace kernel only")
    _check_degree(basis, m)
    seg = basis.segments[0]
    if seg.weight.family != "scaled_laguerre":
        raise KernelMismatch("closed form needs a Laguerre-type base weight")
    alpha, s = seg.weight.params
    a = power_coefficients(seg.rec, m)
    x = np.asarray(x, dtype=float)
    k = np.arange(m + 1)
    expo = alpha / 2.0 + k + 1.0
    terms = a[:, None] * gamma(expo)[:, None] / np.power.outer(x.reshape(-1) + s / 2.0, expo).T
    out = terms.sum(axis=0).reshape(x.shape)
    return out.item() if out.ndim == 0 else out


def reconstruct(basis, c, x, N, mode="partial"):
    """``sum_i sum_m mu_m c_m^(i) phi_m^(i)(x)`` with summability multipliers mu."""
    from .approx import summability_multipliers

    mu = summability_multipliers(N, mode)
    top = mu.size - 1
    if top > basis.N_max or top > c.N:
        raise DegreeOutOfRange(f"mode {mode} with N={N} needs coefficients through {top}")
    mats, _ = basis_matrix(basis, x)
    total = 0.0
    for mat, coef in zip(mats, c.values):
        total = total + np.tensordot(mu * coef[: top + 1], mat[: top + 1], axes=1)
    return total.item() if np.ndim(total) == 0 else total


def kernel_expansion_residual(basis, x, y, N):
    """``|Psi(x, y) - sum_i sum_{m<=N} phi_m^(i)(x) p_m^(i)(y) sqrt(w_x0^(i)(y))|``."""
    _check_degree(basis, N)
    y = float(y)
    seg = next((s for s in basis.segments if s.interval.lo < y < s.interval.hi), None)
    if seg is None:
        raise DomainViolation(f"y={y} is not inside a segment")
    i = basis.segments.index(seg)
    mats, _ = basis_matrix(basis, x)
    series = np.tensordot(mats[i][: N + 1].T, segment_functions(seg, N, np.array(y)), axes=1)
    exact = kernels.kernel_eval(basis.kernel, x, y)
    out = np.abs(exact - series)
    return out.item() if np.ndim(out) == 0 else out
