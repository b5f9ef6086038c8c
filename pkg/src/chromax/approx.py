"""Summability means, weighted norms, best-approximation proxies and convergence experiments."""

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import optimize, special

from . import chromatic, dyadic, kernels, orthopoly, quad
from .errors import (
    IRLSNonConvergence,
    KernelMismatch,
    ParameterInfeasible,
    ParameterOutOfRange,
)
from .orthopoly import Interval


def summability_multipliers(n, mode="partial"):
    """Multipliers mu_j of the partial sum, Cesaro mean or de la Vallee Poussin mean."""
    n = int(n)
    if mode == "partial":
        if n < 0:
            raise ParameterOutOfRange("partial sums need n >= 0")
        return np.ones(n + 1)
    if n < 1:
        raise ParameterOutOfRange(f"{mode} means need n >= 1")
    j = np.arange(2 * n if mode == "dvp" else n, dtype=float)
    if mode == "cesaro":
        return (n - j) / n
    if mode == "dvp":
        return np.where(j <= n, 1.0, (2 * n - j) / n)
    raise ParameterOutOfRange(f"unknown summability mode {mode!r}")


def _is_interval(grid):
    if isinstance(grid, Interval):
        return True
    return (isinstance(grid, (tuple, list)) and len(grid) == 2
            and all(np.ndim(g) == 0 for g in grid))


def _discrete(grid, log_profile, level=1):
    """``(nodes, masses)`` from an explicit pair or from an interval."""
    if _is_interval(grid):
        lo, hi = (grid.lo, grid.hi) if isinstance(grid, Interval) else grid
        return quad.layout(float(lo), float(hi), level, log_profile=log_profile)
    nodes, masses = grid
    return np.asarray(nodes, dtype=float), np.asarray(masses, dtype=float)


def _log_abs(fn):
    def profile(y):
        with np.errstate(all="ignore"):
            return np.log(np.abs(np.asarray(fn(y), dtype=complex)))
    return profile


def weighted_norm(h, weight, p, grid):
    """``(int |h|**p weight)**(1/p)``; for p = inf the sup of |h| where weight > 0.

    ``grid`` is an interval (adaptive quadrature) or a pair ``(nodes, masses)``.
    """
    if np.isinf(p):
        y, _ = _discrete(grid, _log_abs(lambda y: np.asarray(h(y)) * weight(y)))
        if _is_interval(grid):
            lo, hi = (grid.lo, grid.hi) if isinstance(grid, Interval) else grid
            if np.isfinite(lo) and np.isfinite(hi):
                y = np.concatenate([y, np.linspace(lo, hi, 20001)])
        wv = np.asarray(weight(y))
        hv = np.abs(np.asarray(h(y)))
        return float(np.max(np.where(wv > 0, hv, 0.0)))
    if p < 1:
        raise ParameterOutOfRange(f"p={p} must be >= 1")

    def integrand(y):
        with np.errstate(all="ignore"):
            v = np.abs(np.asarray(h(y))) ** p * weight(y)
        return np.nan_to_num(v)

    if _is_interval(grid):
        lo, hi = (grid.lo, grid.hi) if isinstance(grid, Interval) else grid
        value, _ = quad.integrate(integrand, float(lo), float(hi), rtol=1e-12)
    else:
        y, m = _discrete(grid, None)
        value = integrand(y) @ m
    return float(value) ** (1.0 / p)


class ENProxy(NamedTuple):
    value: float
    poly: orthopoly.OrthoSeries
    converged: bool


def _lp_fit(A, G, lam, p):
    """Minimize ||G - A c|| in weighted l1 or l-infinity by linear programming."""
    J, k = A.shape
    if np.isinf(p):
        # variables (c, t): minimize t subject to |G - A c| <= t
        cost = np.r_[np.zeros(k), 1.0]
        ones = np.ones((J, 1))
        A_ub = np.block([[-A, -ones], [A, -ones]])
        b_ub = np.r_[-G, G]
    else:
        # variables (c, s): minimize sum lam s subject to |G - A c| <= s
        cost = np.r_[np.zeros(k), lam]
        eye = np.eye(J)
        A_ub = np.block([[-A, -eye], [A, -eye]])
        b_ub = np.r_[-G, G]
    bounds = [(None, None)] * k + [(0, None)] * (A_ub.shape[1] - k)
    res = optimize.linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0:
        return np.linalg.lstsq(A * np.sqrt(lam)[:, None], G * np.sqrt(lam), rcond=None)[0], False
    return res.x[:k], True


def _objective(r, lam, p):
    return float(np.sum(lam * np.abs(r) ** p))


def en_proxy(g, weight, p, n, grid, *, product=None, max_iter=50, rtol=1e-10):
    """Near-best weighted approximation error ``min_P ||(g - P) weight||_p`` over degree n.

    The norm is taken on the discrete measure given by ``grid`` (an interval,
    resolved by a composite Gauss layout, or an explicit ``(nodes, masses)``
    pair).  ``product`` optionally evaluates ``g * weight`` directly where g
    alone would overflow.  p = 2 is exact least squares, 1 < p < inf uses
    iteratively reweighted least squares, p = 1 and p = inf linear programming.
    """
    if n < 0:
        raise ParameterOutOfRange("degree must be nonnegative")
    if not (p >= 1):
        raise ParameterOutOfRange(f"p={p} must be >= 1")
    gw = product or (lambda y: np.asarray(g(y)) * weight(y))

    def profile(y):
        with np.errstate(all="ignore"):
            return np.maximum(np.log(np.abs(gw(y))),
                              np.log(weight(y)) + 2 * (n + 1) * np.log1p(np.abs(y)))

    y, lam = _discrete(grid, profile)
    with np.errstate(all="ignore"):
        W = np.asarray(weight(y), dtype=float)
        G = np.asarray(gw(y), dtype=float)
    keep = (W > 0) & (lam > 0) & np.isfinite(G)
    y, lam, W, G = y[keep], lam[keep], W[keep], G[keep]
    if y.size < 10 * (n + 1):
        raise ParameterOutOfRange(f"grid has {y.size} points, need at least {10 * (n + 1)}")
    rec = orthopoly.recurrence_from_measure(y, lam * W * W, n)
    A = (orthopoly.eval_orthonormal(rec, n, y) * W).T
    c = A.T @ (lam * G)
    converged = True
    if p == 2:
        pass
    elif np.isinf(p) or p == 1:
        c, converged = _lp_fit(A, G, lam, p)
    else:
        best_c, best_f = c, _objective(G - A @ c, lam, p)
        previous = best_f
        converged = False
        for _ in range(max_iter):
            r = G - A @ c
            floor = 1e-14 * max(np.max(np.abs(r)), 1e-300)
            omega = lam * np.maximum(np.abs(r), floor) ** (p - 2)
            sq = np.sqrt(omega)
            step = np.linalg.lstsq(A * sq[:, None], G * sq, rcond=None)[0] - c
            # Newton scaling 1/(p-1) keeps p > 2 from oscillating; backtrack until descent
            t = 1.0 / (p - 1.0) if p > 2 else 1.0
            for _ in range(30):
                f = _objective(G - A @ (c + t * step), lam, p)
                if f <= previous:
                    break
                t *= 0.5
            c = c + t * step
            if f < best_f:
                best_c, best_f = c, f
            if abs(previous - f) <= rtol * max(previous, 1e-300):
                converged = True
                break
            previous = f
        c = best_c
        if not converged:
            warnings.warn(f"IRLS for p={p}, n={n} stopped after {max_iter} iterations",
                          IRLSNonConvergence, stacklevel=2)
    r = G - A @ c
    if np.isinf(p):
        value = float(np.max(np.abs(r)))
    else:
        value = _objective(r, lam, p) ** (1.0 / p)
    return ENProxy(value, orthopoly.OrthoSeries(rec, c), converged)


# Convergence experiments ----------------------------------------------------

@dataclass(frozen=True)
class ConvergenceConfig:
    """One convergence sweep.

    ``p`` is the exponent of the best-approximation proxy, ``q`` the exponent of
    the x-side error norm.  ``omega`` multiplies the proxy weight ``sqrt(w_x0)``
    and ``rho`` weighs the x-side norm.  ``fbar`` is the exact transform of
    ``fhat`` when known.
    """

    name: str
    kernel: kernels.KernelModel
    base_weight: orthopoly.WeightSpec
    x0: float
    fhat: Callable = field(compare=False)
    p: float = 2.0
    q: float = 2.0
    omega: Optional[Callable] = field(default=None, compare=False)
    rho: Optional[Callable] = field(default=None, compare=False)
    degrees: tuple = (2, 4, 6, 8, 12, 16)
    fhat_breakpoints: tuple = ()
    fbar: Optional[Callable] = field(default=None, compare=False)
    x_window: Optional[tuple] = None
    x_panels: int = 160
    x_log_eps: float = math.log(1e-16)
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("p", "q"):
            v = getattr(self, name)
            if not (1 <= v <= np.inf):
                raise ParameterInfeasible(f"exponent {name}={v} outside [1, inf]")
        if not self.degrees:
            raise ParameterOutOfRange("degree list is empty")
        if min(self.degrees) < 1:
            raise ParameterOutOfRange("degrees must be >= 1")


class ConvergenceRow(NamedTuple):
    n: int
    lhs_norm: float
    en_proxy: float
    ratio: float
    wall_time: float


@dataclass(frozen=True)
class ConvergenceReport:
    rows: tuple
    meta: dict

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])


def _x_rule(cfg):
    K = cfg.kernel
    if cfg.x_window is not None:
        lo, hi = cfg.x_window
        return quad.rule_from_breaks(np.linspace(lo, hi, cfg.x_panels + 1))
    rho = cfg.rho or (lambda x: np.ones_like(x))
    dom = K.x_domain

    def profile(x):
        with np.errstate(all="ignore"):
            return np.log(rho(x)) - cfg.q * np.log1p(np.abs(x))

    return quad.layout(dom.lo, dom.hi, 1, log_profile=profile, log_eps=cfg.x_log_eps)


def _norm(values, weights, p):
    values = np.abs(values)
    if np.isinf(p):
        return float(values.max())
    return float(np.sum(values**p * weights) ** (1.0 / p))


def _en_grid(seg, degree):
    iv = seg.interval

    def profile(y):
        return seg.weight.log(y) + 2 * (degree + 1) * np.log1p(np.abs(y))

    return quad.layout(iv.lo, iv.hi, 1, log_profile=profile, breakpoints=seg.weight.breakpoints)


def convergence_experiment(cfg):
    """Error of de la Vallee Poussin reconstructions against the best-approximation proxy."""
    K = cfg.kernel
    if K.name == "poisson":
        raise KernelMismatch("convergence sweeps need a single-segment kernel")
    top = max(cfg.degrees)
    t0 = time.perf_counter()
    basis = chromatic.build_basis(K, cfg.base_weight, cfg.x0, 2 * top - 1)
    coeffs = chromatic.chromatic_coefficients(basis, cfg.fhat, breakpoints=cfg.fhat_breakpoints)
    seg = basis.segments[0]
    omega = cfg.omega or (lambda y: np.ones_like(y))
    setup = time.perf_counter() - t0

    if K.name == "walsh":
        M_int, m_frac = K.params
        y_c = dyadic.cell_midpoints(M_int, m_frac)
        target = dyadic.walsh_transform_grid(np.asarray(cfg.fhat(y_c), dtype=float), M_int, m_frac)
        mats = chromatic.walsh_grid_matrix(basis)
        xw = np.full(target.size, 2.0**-M_int)
        rho_x = np.ones_like(xw)
        en_grid = (y_c, np.full(y_c.size, 2.0**-m_frac))
    else:
        x, xw = _x_rule(cfg)
        rho_x = (cfg.rho or (lambda x: np.ones_like(x)))(x)
        if cfg.fbar is not None:
            target = np.asarray(cfg.fbar(x))
        else:
            target, _ = kernels.transform(K, cfg.fhat, x, breakpoints=cfg.fhat_breakpoints)
        mats, _ = chromatic.basis_matrix(basis, x)
        en_grid = _en_grid(seg, top)

    def sqrt_w(y):
        return seg.sqrt_weight(y)

    def product(y):
        return np.asarray(cfg.fhat(y)) * omega(y)

    def weight(y):
        return sqrt_w(y) * omega(y)

    def g(y):
        with np.errstate(all="ignore"):
            return np.asarray(cfg.fhat(y)) / sqrt_w(y)

    rows = []
    for n in sorted(cfg.degrees):
        t1 = time.perf_counter()
        mu = summability_multipliers(n, "dvp")
        v = np.tensordot(mu * coeffs[0][: mu.size], mats[0][: mu.size], axes=1)
        lhs = _norm(v - target, xw * rho_x, cfg.q)
        en = en_proxy(g, weight, cfg.p, n, en_grid, product=product).value
        ratio = lhs / en if en > 0 else (0.0 if lhs == 0 else math.inf)
        rows.append(ConvergenceRow(n, lhs, en, ratio, time.perf_counter() - t1))
    meta = {"name": cfg.name, "kernel": K.name, "weight": repr(cfg.base_weight),
            "x0": cfg.x0, "p": cfg.p, "q": cfg.q, "degrees": list(cfg.degrees),
            "N_max": basis.N_max, "setup_time": setup, **cfg.meta}
    return ConvergenceReport(tuple(rows), meta)


# Shipped experiment presets ---------------------------------------------------

def _exp_e1(z):
    """``exp(z) E1(z)`` without overflow for large z."""
    z = np.asarray(z, dtype=float)
    small = z < 600
    zs = np.where(small, z, 1.0)
    zl = np.where(small, 1.0, z)
    series = sum((-1) ** k * math.factorial(k) / zl ** (k + 1) for k in range(12))
    with np.errstate(over="ignore"):
        direct = np.exp(zs) * special.exp1(zs)
    return np.where(small, direct, series)


def laplace_test_function(x0=1.0):
    """``fhat(y) = exp(-y)/(1+y)`` and its Laplace transform ``exp(1+x) E1(1+x)``."""
    return (lambda y: np.exp(-y) / (1.0 + y)), (lambda x: _exp_e1(1.0 + np.asarray(x)))


def hermite_sweep(degrees=(2, 4, 6, 8, 12, 16)):
    """Fourier transform, Hermite weight, ``fhat = exp(-y**2)``."""
    return ConvergenceConfig(
        "fourier-hermite", kernels.fourier(), orthopoly.hermite(), 0.0,
        lambda y: np.exp(-y * y), degrees=degrees,
        fbar=lambda x: np.exp(-np.asarray(x) ** 2 / 4) / math.sqrt(2.0),
        x_window=(-20.0, 20.0), x_panels=80)


def freud_sweep(degrees=(2, 4, 6, 8, 12, 16)):
    """Fourier transform, Freud weight ``exp(-y**4)``, ``fhat = exp(-y**2)``."""
    return ConvergenceConfig(
        "fourier-freud", kernels.fourier(), orthopoly.freud(4), 0.0,
        lambda y: np.exp(-y * y), degrees=degrees,
        fbar=lambda x: np.exp(-np.asarray(x) ** 2 / 4) / math.sqrt(2.0),
        x_window=(-20.0, 20.0), x_panels=80)


def jacobi_sweep(alpha=0.5, beta=0.5, degrees=(2, 4, 6, 8, 12, 16)):
    """Fourier transform, Jacobi weight times ``sqrt(1-y**2)``, ``fhat = (1-y**2) exp(y)``."""
    def fhat(y):
        y = np.asarray(y, dtype=float)
        return np.where(np.abs(y) < 1, (1 - y * y) * np.exp(y), 0.0)

    def omega(y):
        with np.errstate(all="ignore"):
            return 1.0 / np.sqrt(1.0 - np.asarray(y) ** 2)

    return ConvergenceConfig(
        "fourier-jacobi", kernels.fourier(), orthopoly.jacobi(alpha + 0.5, beta + 0.5), 0.0,
        fhat, omega=omega, degrees=degrees, fhat_breakpoints=(-1.0, 1.0),
        x_window=(-100.0, 100.0), x_panels=400,
        meta={"jacobi_alpha": alpha, "jacobi_beta": beta})


def walsh_sweep(alpha=0.0, M_int=6, m_frac=10, degrees=(2, 4, 6, 8, 12, 16)):
    """Walsh transform, Laguerre weight, ``f = y**(alpha/2) exp(-y/2) / (1+y)``."""
    return ConvergenceConfig(
        "walsh-laguerre", kernels.walsh(M_int, m_frac), orthopoly.laguerre(alpha), 0.0,
        lambda y: np.asarray(y) ** (alpha / 2) * np.exp(-np.asarray(y) / 2) / (1.0 + np.asarray(y)),
        degrees=degrees)


def laplace_sweep(x0=1.0, alpha=0.0, degrees=(2, 4, 6, 8, 12, 16)):
    fhat, fbar = laplace_test_function(x0)
    return ConvergenceConfig("laplace", kernels.laplace(), orthopoly.laguerre(alpha), x0,
                             fhat, p=2.0, q=2.0, degrees=degrees, fbar=fbar)


def _conj(p):
    return math.inf if p == 1 else (1.0 if np.isinf(p) else p / (p - 1.0))


def laplace_weighted_sweep(p=2.0, q=2.0, a=0.0, b=0.0, delta=0.01, eps=0.01, x0=1.0, alpha=0.0,
                     degrees=(2, 4, 6, 8, 12, 16)):
    """Laplace sweep with ``omega = (sy/(1+sy))**a (1+sy)**b`` and the matching rho."""
    if not (1 < p < math.inf and 1 < q < math.inf):
        raise ParameterInfeasible("need 1 < p, q < inf")
    inv_pc = 1.0 - 1.0 / p
    if not (0 <= b <= a < inv_pc):
        raise ParameterInfeasible(f"need 0 <= b <= a < 1/p' = {inv_pc:g}")
    s = 2 * x0 + 1
    if p <= q:
        e0, e1 = -(a - b) * q, q * (inv_pc - b) - 1
    else:
        if not 0 < delta < eps:
            raise ParameterInfeasible("need 0 < delta < eps")
        e0, e1 = -(a - b) * q - eps, (a - b) * q - (a * q + 1) / p + delta
    fhat, fbar = laplace_test_function(x0)
    return ConvergenceConfig(
        "laplace-weighted", kernels.laplace(), orthopoly.laguerre(alpha), x0, fhat, p=p, q=q,
        omega=lambda y: (s * y / (1 + s * y)) ** a * (1 + s * y) ** b,
        rho=lambda x: (1 + x) ** e0 * x**e1, degrees=degrees, fbar=fbar,
        meta={"a": a, "b": b, "delta": delta, "eps": eps})


def laplace_power_sweep(p=1.5, q=2.0, a=0.2, b=None, delta=0.01, x0=1.0, alpha=0.0,
                     degrees=(2, 4, 6, 8, 12, 16)):
    """Laplace sweep with power-type weights ``(s y)**a`` (p <= q) or the mixed weights (q < p)."""
    if not (1 < p < math.inf and 1 < q < math.inf):
        raise ParameterInfeasible("need 1 < p, q < inf")
    inv_pc, inv_qc = 1.0 - 1.0 / p, 1.0 - 1.0 / q
    s = 2 * x0 + 1
    if p <= q:
        b = a if b is None else b
        if b != a or not 0 <= a < inv_pc:
            raise ParameterInfeasible(f"need 0 <= b = a < 1/p' = {inv_pc:g}")
        omega = lambda y: (s * y) ** a
        e = q * (inv_pc - a) - 1
        log_eps = math.log(1e-16)
    else:
        b = 0.0 if b is None else b
        if not (b >= 0 and inv_qc <= a < inv_pc):
            raise ParameterInfeasible(f"need b >= 0 and 1/q' <= a < 1/p' ({inv_qc:g}, {inv_pc:g})")
        if not delta > 0:
            raise ParameterInfeasible("need delta > 0")
        omega = lambda y: (s * y / (1 + s * y)) ** a * (1 + s * y) ** b
        e = ((a - b) * p * q - a * q - 1) / p - delta
        # rho * |f|**q decays too slowly for a 1e-16 cut inside the scan range
        log_eps = math.log(1e-12)
    fhat, fbar = laplace_test_function(x0)
    return ConvergenceConfig(
        "laplace-power", kernels.laplace(), orthopoly.laguerre(alpha), x0, fhat, p=p, q=q,
        omega=omega, rho=lambda x: np.asarray(x, dtype=float) ** e, degrees=degrees, fbar=fbar,
        x_log_eps=log_eps, meta={"a": a, "b": b, "delta": delta})


PRESETS = {
    "fourier-hermite": hermite_sweep,
    "fourier-freud": freud_sweep,
    "fourier-jacobi": jacobi_sweep,
    "walsh-laguerre": walsh_sweep,
    "laplace": laplace_sweep,
    "laplace-weighted": laplace_weighted_sweep,
    "laplace-power": laplace_power_sweep,
}


def shipped_suite():
    """The configurations the regression bounds are asserted on."""
    return [
        hermite_sweep(),
        freud_sweep(),
        jacobi_sweep(),
        walsh_sweep(),
        laplace_sweep(),
        laplace_weighted_sweep(p=2.0, q=2.0, a=0.0, b=0.0),
        laplace_weighted_sweep(p=1.5, q=3.0, a=0.2, b=0.1),
        laplace_power_sweep(p=1.5, q=2.0, a=0.2),
        laplace_power_sweep(p=3.0, q=1.5, a=0.4, b=0.1),
    ]
