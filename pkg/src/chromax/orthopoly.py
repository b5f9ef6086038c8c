"""Orthonormal polynomial families, Gauss rules and Christoffel-type diagnostics.

Recurrences are stored in the orthonormal form

    sqrt(beta[k+1]) p[k+1](y) = (y - alpha[k]) p[k](y) - sqrt(beta[k]) p[k-1](y)

with ``beta[0]`` holding the total mass of the weight, so ``p[0] = 1/sqrt(beta[0])``
and Gauss weights sum to the mass.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import special
from scipy.linalg import LinAlgError, eigvalsh_tridiagonal

from . import quad
from .errors import (
    DegreeOutOfRange,
    EigensolveFailure,
    GridTooCoarse,
    ParameterOutOfRange,
    StieltjesUnstable,
)

__all__ = [
    "Interval",
    "REAL_LINE",
    "HALF_LINE",
    "WeightSpec",
    "Recurrence",
    "QuadratureRule",
    "OrthoSeries",
    "GammaLambda",
    "hermite",
    "laguerre",
    "jacobi",
    "freud",
    "scaled_laguerre",
    "generic",
    "classical_recurrence",
    "stieltjes_recurrence",
    "recurrence_from_measure",
    "discretize_weight",
    "eval_orthonormal",
    "gauss_rule",
    "gamma_lambda",
]


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ParameterOutOfRange(f"empty interval ({self.lo}, {self.hi})")

    @property
    def finite(self):
        return bool(np.isfinite(self.lo) and np.isfinite(self.hi))

    def contains(self, y):
        y = np.asarray(y)
        return (y >= self.lo) & (y <= self.hi)


REAL_LINE = Interval(-np.inf, np.inf)
HALF_LINE = Interval(0.0, np.inf)


def _log_of(fn):
    def log_fn(y):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(fn(y))

    return log_fn


@dataclass(frozen=True)
class WeightSpec:
    """A nonnegative weight on an interval.

    ``family`` is one of ``hermite``, ``laguerre``, ``jacobi``, ``freud``,
    ``scaled_laguerre`` or ``generic``; ``params`` holds the family parameters.
    ``log_evaluator`` is optional and only used for locating tails.
    """

    family: str
    interval: Interval
    params: tuple = ()
    evaluator: Optional[Callable] = field(default=None, compare=False)
    log_evaluator: Optional[Callable] = field(default=None, compare=False)
    breakpoints: tuple = ()

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        inside = (y > self.interval.lo) & (y < self.interval.hi)
        with np.errstate(all="ignore"):
            v = np.asarray(self.evaluator(y), dtype=float)
        return np.where(inside, v, 0.0)

    def log(self, y):
        y = np.asarray(y, dtype=float)
        inside = (y > self.interval.lo) & (y < self.interval.hi)
        fn = self.log_evaluator or _log_of(self.evaluator)
        with np.errstate(all="ignore"):
            v = np.asarray(fn(y), dtype=float)
        return np.where(inside, v, -np.inf)

    def __repr__(self):
        return f"WeightSpec({self.family}, {self.params}, ({self.interval.lo}, {self.interval.hi}))"


def _check_exponent(name, value):
    if not value > -1:
        raise ParameterOutOfRange(f"{name}={value} must exceed -1")


def hermite():
    return WeightSpec("hermite", REAL_LINE, (),
                      lambda y: np.exp(-y * y), lambda y: -y * y)


def laguerre(alpha=0.0):
    _check_exponent("alpha", alpha)
    return WeightSpec("laguerre", HALF_LINE, (float(alpha),),
                      lambda y: y**alpha * np.exp(-y),
                      lambda y: alpha * np.log(y) - y)


def scaled_laguerre(alpha, scale):
    """``y**alpha * exp(-scale*y)`` on the half-line."""
    _check_exponent("alpha", alpha)
    if not scale > 0:
        raise ParameterOutOfRange(f"scale={scale} must be positive")
    return WeightSpec("scaled_laguerre", HALF_LINE, (float(alpha), float(scale)),
                      lambda y: y**alpha * np.exp(-scale * y),
                      lambda y: alpha * np.log(y) - scale * y)


def jacobi(alpha, beta):
    """``(1-y)**alpha * (1+y)**beta`` on (-1, 1)."""
    _check_exponent("alpha", alpha)
    _check_exponent("beta", beta)
    return WeightSpec("jacobi", Interval(-1.0, 1.0), (float(alpha), float(beta)),
                      lambda y: (1 - y) ** alpha * (1 + y) ** beta,
                      lambda y: alpha * np.log1p(-y) + beta * np.log1p(y))


def freud(m=4):
    """``exp(-|y|**m)`` on the real line, m an even integer."""
    if int(m) != m or m < 2 or m % 2:
        raise ParameterOutOfRange(f"Freud exponent must be an even integer >= 2, got {m}")
    m = int(m)
    return WeightSpec("freud", REAL_LINE, (m,),
                      lambda y: np.exp(-np.abs(y) ** m), lambda y: -np.abs(y) ** m)


def generic(evaluator, interval, log_evaluator=None, breakpoints=(), name="generic"):
    if not isinstance(interval, Interval):
        interval = Interval(*interval)
    return WeightSpec("generic", interval, (name,), evaluator, log_evaluator,
                      tuple(breakpoints))


@dataclass(frozen=True)
class Recurrence:
    alpha: np.ndarray
    beta: np.ndarray
    interval: Interval

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        b = np.asarray(self.beta, dtype=float)
        if a.shape != b.shape or a.ndim != 1 or a.size == 0:
            raise ValueError("alpha and beta must be 1-d arrays of equal length")
        if not np.all(b > 0):
            raise StieltjesUnstable("recurrence has a nonpositive beta coefficient")
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def n_max(self):
        """Highest polynomial degree this recurrence can evaluate."""
        return self.alpha.size - 1

    @property
    def mass(self):
        return float(self.beta[0])

    def leading_ratios(self):
        """gamma_k / gamma_{k+1} = sqrt(beta_{k+1}) for k = 0..n_max-1."""
        return np.sqrt(self.beta[1:])


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, fn):
        return np.asarray(fn(self.nodes)) @ self.weights


def classical_recurrence(w, n_max):
    """Closed-form recurrence for Hermite, Laguerre, Jacobi and scaled Laguerre weights."""
    if n_max < 0:
        raise DegreeOutOfRange(f"n_max={n_max} must be nonnegative")
    k = np.arange(n_max + 1, dtype=float)
    if w.family == "hermite":
        alpha = np.zeros_like(k)
        beta = k / 2
        beta[0] = math.sqrt(math.pi)
    elif w.family in ("laguerre", "scaled_laguerre"):
        a = w.params[0]
        _check_exponent("alpha", a)
        s = w.params[1] if w.family == "scaled_laguerre" else 1.0
        alpha = (2 * k + a + 1) / s
        beta = k * (k + a) / s**2
        beta[0] = math.exp(special.gammaln(a + 1) - (a + 1) * math.log(s))
    elif w.family == "jacobi":
        a, b = w.params
        _check_exponent("alpha", a)
        _check_exponent("beta", b)
        alpha, beta = _jacobi_coefficients(a, b, n_max)
    else:
        raise ParameterOutOfRange(f"no closed-form recurrence for family {w.family!r}")
    return Recurrence(alpha, beta, w.interval)


def _jacobi_coefficients(a, b, n_max):
    alpha = np.empty(n_max + 1)
    beta = np.empty(n_max + 1)
    s = a + b
    alpha[0] = (b - a) / (s + 2)
    beta[0] = math.exp((s + 1) * math.log(2) + special.betaln(a + 1, b + 1))
    if n_max >= 1:
        beta[1] = 4 * (a + 1) * (b + 1) / ((s + 2) ** 2 * (s + 3))
    k = np.arange(1, n_max + 1, dtype=float)
    two = 2 * k + s
    alpha[1:] = (b * b - a * a) / (two * (two + 2))
    k = k[1:]
    two = two[1:]
    beta[2:] = 4 * k * (k + a) * (k + b) * (k + s) / (two**2 * (two + 1) * (two - 1))
    return alpha, beta


def discretize_weight(w, degree, level=0, **layout_kw):
    """Discrete measure ``(nodes, masses)`` resolving ``w`` times polynomials of ``degree``."""

    def profile(y):
        return w.log(y) + 2 * degree * np.log1p(np.abs(y))

    iv = w.interval
    x, lam = quad.layout(iv.lo, iv.hi, level, log_profile=profile,
                         breakpoints=w.breakpoints, **layout_kw)
    mu = lam * w(x)
    keep = mu > 0
    return x[keep], mu[keep]


def _stieltjes(x, mu, n_max):
    """Orthonormal Stieltjes procedure with full reorthogonalization on a discrete measure."""
    alpha = np.empty(n_max + 1)
    beta = np.empty(n_max + 2)
    beta[0] = mu.sum()
    basis = np.empty((n_max + 1, x.size))
    p_prev = np.zeros_like(x)
    p = np.full_like(x, 1 / math.sqrt(beta[0]))
    for k in range(n_max + 1):
        basis[k] = p
        alpha[k] = np.sum(mu * x * p * p)
        q = (x - alpha[k]) * p - (math.sqrt(beta[k]) if k else 0.0) * p_prev
        done = basis[: k + 1]
        q -= done.T @ (done @ (mu * q))
        beta[k + 1] = np.sum(mu * q * q)
        if not beta[k + 1] > 0 or not np.isfinite(beta[k + 1]):
            raise StieltjesUnstable(f"beta[{k + 1}] = {beta[k + 1]} is not positive")
        p_prev, p = p, q / math.sqrt(beta[k + 1])
    return alpha, beta


def recurrence_from_measure(nodes, masses, n_max, interval=REAL_LINE):
    """Recurrence of the discrete measure ``sum masses[j] * delta(nodes[j])``."""
    nodes = np.asarray(nodes, dtype=float)
    masses = np.asarray(masses, dtype=float)
    if n_max >= nodes.size:
        raise DegreeOutOfRange(f"a {nodes.size}-point measure supports degrees < {nodes.size}")
    alpha, beta = _stieltjes(nodes, masses, n_max)
    return Recurrence(alpha, beta[:-1], interval)


def stieltjes_recurrence(w, n_max, discretization=None):
    """Recurrence for an arbitrary weight by the discretized Stieltjes procedure.

    ``discretization`` may set ``tol`` (default 1e-10), ``max_level`` (default 6)
    and ``base_panels`` (default 8).  The panel count doubles until every
    coefficient stabilizes to ``tol``.
    """
    opts = {"tol": 1e-10, "max_level": 6, "base_panels": 8}
    opts.update(discretization or {})
    tol = opts["tol"]
    previous = None
    for level in range(opts["max_level"] + 1):
        x, mu = discretize_weight(w, n_max + 1, level, base_panels=opts["base_panels"])
        if x.size <= n_max + 1:
            continue
        alpha, beta = _stieltjes(x, mu, n_max)
        if previous is not None:
            pa, pb = previous
            scale = np.abs(alpha) + np.sqrt(beta[1:])
            da = np.abs(alpha - pa) <= tol * scale
            db = np.abs(beta - pb) <= tol * beta
            if da.all() and db.all():
                return Recurrence(alpha, beta[:-1], w.interval)
        previous = (alpha, beta)
    raise StieltjesUnstable(
        f"Stieltjes coefficients for {w!r} did not stabilize to {tol:g} "
        f"after {opts['max_level']} refinements"
    )


def eval_orthonormal(rec, n, y):
    """Values ``p_0(y) .. p_n(y)`` stacked along a new leading axis."""
    if n < 0 or n > rec.n_max:
        raise DegreeOutOfRange(f"degree {n} outside 0..{rec.n_max}")
    y = np.asarray(y, dtype=float)
    out = np.empty((n + 1,) + y.shape)
    out[0] = 1 / math.sqrt(rec.beta[0])
    sb = np.sqrt(rec.beta)
    prev = np.zeros_like(y)
    for k in range(n):
        out[k + 1] = ((y - rec.alpha[k]) * out[k] - (sb[k] if k else 0.0) * prev) / sb[k + 1]
        prev = out[k]
    return out


def gauss_rule(rec, n):
    """n-point Gauss rule: tridiagonal eigenvalues as nodes, Christoffel numbers as weights."""
    if n < 1 or n > rec.n_max + 1:
        raise DegreeOutOfRange(f"rule size {n} outside 1..{rec.n_max + 1}")
    try:
        nodes = eigvalsh_tridiagonal(rec.alpha[:n], np.sqrt(rec.beta[1:n]))
    except LinAlgError as exc:
        raise EigensolveFailure(str(exc)) from exc
    if not np.all(np.isfinite(nodes)):
        raise EigensolveFailure("tridiagonal eigensolver returned non-finite nodes")
    nodes = np.sort(nodes)
    p = eval_orthonormal(rec, n - 1, nodes)
    weights = 1 / np.sum(p * p, axis=0)
    return QuadratureRule(nodes, weights)


class OrthoSeries:
    """A polynomial stored by its coefficients in an orthonormal basis."""

    def __init__(self, rec, coeffs):
        self.rec = rec
        self.coeffs = np.asarray(coeffs)

    @property
    def degree(self):
        return self.coeffs.size - 1

    def __call__(self, y):
        return np.tensordot(self.coeffs, eval_orthonormal(self.rec, self.degree, y), axes=1)

    def __repr__(self):
        return f"OrthoSeries(degree={self.degree})"


class GammaLambda(NamedTuple):
    gamma: float
    lam: float
    ratio: float


def gamma_lambda(rec, w, rho, n, grid):
    """Gamma_{n,w} = max_k gamma_k/gamma_{k+1} and Lambda_{n,w rho} = sup w rho sum p_k^2."""
    if n < 0 or n + 1 > rec.n_max:
        raise DegreeOutOfRange(f"need coefficients through beta[{n + 1}], have {rec.n_max}")
    grid = np.sort(np.asarray(grid, dtype=float))
    gamma = float(np.max(np.sqrt(rec.beta[1 : n + 2])))
    wv = w(grid)
    peak = wv.max()
    for end, bound in ((grid[0], w.interval.lo), (grid[-1], w.interval.hi)):
        if not np.isfinite(bound) and w(np.array([end]))[0] > 1e-14 * peak:
            raise GridTooCoarse(f"grid end {end} inside the effective support of the weight")
    p = eval_orthonormal(rec, n, grid)
    christoffel = wv * rho(grid) * np.sum(p * p, axis=0)
    lam = float(christoffel.max())
    if np.max(np.abs(np.diff(christoffel))) > 0.1 * lam:
        raise GridTooCoarse("Christoffel-type sum varies by more than 10% between grid points")
    ratio = gamma * lam / n if n > 0 else math.nan
    return GammaLambda(gamma, lam, ratio)
