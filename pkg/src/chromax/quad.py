"""Composite Gauss-Legendre rules on truncated, graded panel layouts.

Every integral in the package (moments for the Stieltjes procedure, transforms,
chromatic coefficients, norms) is evaluated on a layout produced here:

* infinite ends are truncated where a log-profile of the integrand has fallen
  ``log_eps`` below its peak,
* the bulk is covered by uniform panels, long algebraic tails by doubling panels,
* finite endpoints and breakpoints get geometrically graded panels so that
  integrable endpoint singularities (``y**alpha``) do not spoil convergence.

Refinement level ``k`` multiplies the panel count by ``2**k``.
"""

import functools
import math

import numpy as np

from .errors import MomentDivergence, QuadratureNonConvergence

GL_ORDER = 20
GRADE_LEVELS = 40
LOG_EPS = math.log(1e-32)
_LOG_BULK = math.log(1e-4)
_SCAN = np.geomspace(1e-7, 1e9, 3200)


@functools.lru_cache(maxsize=None)
def gauss_legendre(order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def rule_from_breaks(breaks, order=GL_ORDER):
    """Gauss-Legendre nodes and weights on every panel ``[breaks[i], breaks[i+1]]``."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(order)
    lo = breaks[:-1, None]
    hi = breaks[1:, None]
    half = 0.5 * (hi - lo)
    nodes = 0.5 * (lo + hi) + half * x
    weights = half * w
    return nodes.ravel(), weights.ravel()


def _log_values(log_profile, y):
    with np.errstate(all="ignore"):
        f = np.asarray(log_profile(y), dtype=float)
    return np.where(np.isnan(f), -np.inf, f)


def abs_log_profile(fn):
    """Log-magnitude envelope of ``fn`` (maximum over any leading axes)."""

    def profile(y):
        with np.errstate(all="ignore"):
            v = np.abs(np.asarray(fn(y)))
            v = v.reshape(-1, v.shape[-1]).max(axis=0) if v.ndim > 1 else v
            return np.log(v)

    return profile


def tail_extent(log_profile, origin, direction, log_eps=LOG_EPS, peak=None):
    """Distances ``(bulk, cutoff)`` from ``origin`` along ``direction``.

    ``cutoff`` is where the profile drops for good below ``peak + log_eps``;
    ``bulk`` the same for a 1e-4 drop.  Raises MomentDivergence when the
    profile has not decayed by the end of the scan.
    """
    s = _SCAN
    f = _log_values(log_profile, origin + direction * s)
    finite = f[np.isfinite(f)]
    if finite.size == 0:
        return s[0], s[0]
    top = finite.max() if peak is None else peak

    def last_above(level):
        idx = np.nonzero(f >= top + level)[0]
        if idx.size == 0:
            return s[0]
        if idx[-1] == s.size - 1:
            raise MomentDivergence(
                f"integrand envelope has not decayed by {s[-1]:.3g} from {origin}"
            )
        return s[idx[-1] + 1]

    return last_above(_LOG_BULK), last_above(log_eps)


def peak_location(log_profile, lo=-np.inf, hi=np.inf):
    """Rough location of the profile maximum inside ``(lo, hi)``."""
    if np.isfinite(lo) and np.isfinite(hi):
        y = np.linspace(lo, hi, 4001)[1:-1]
    elif np.isfinite(lo):
        y = lo + _SCAN
    elif np.isfinite(hi):
        y = hi - _SCAN
    else:
        y = np.concatenate([-_SCAN[::-1], [0.0], _SCAN])
    f = _log_values(log_profile, y)
    if not np.any(np.isfinite(f)):
        return 0.0 if not np.isfinite(lo) and not np.isfinite(hi) else y[0]
    return float(y[np.argmax(f)])


def _graded(a, h, levels):
    """Breakpoints ``a + h*2**-k`` for k = levels..1 (h may be negative)."""
    return a + h * np.exp2(-np.arange(levels, 0, -1, dtype=float))


def _finite_piece(a, b, n, grade_a, grade_b, levels):
    edges = np.linspace(a, b, n + 1)
    parts = [edges]
    if grade_a:
        parts.append(_graded(a, edges[1] - a, levels))
    if grade_b:
        parts.append(_graded(b, edges[-2] - b, levels))
    return np.unique(np.concatenate(parts))


def _half_line_piece(a, direction, level, log_profile, log_eps, grade_a,
                     base_panels, max_panel, levels):
    bulk, cut = tail_extent(log_profile, a, direction, log_eps)
    uniform = min(cut, 4.0 * bulk)
    n = base_panels * 2**level
    n = max(n, int(math.ceil(uniform / max_panel)))
    offsets = [np.linspace(0.0, uniform, n + 1)]
    edge = uniform
    while edge < cut:
        nxt = min(2.0 * edge, cut)
        m = max(2**level, int(math.ceil((nxt - edge) / max_panel)))
        offsets.append(np.linspace(edge, nxt, m + 1))
        edge = nxt
    off = np.unique(np.concatenate(offsets))
    if grade_a:
        off = np.unique(np.concatenate([off, _graded(0.0, off[1], levels)]))
    return a + direction * off


def layout(lo, hi, level=0, *, log_profile, log_eps=LOG_EPS, breakpoints=(),
           grade=True, base_panels=8, max_panel=np.inf, order=GL_ORDER,
           grade_levels=None):
    """Quadrature nodes and weights for ``(lo, hi)`` at refinement ``level``.

    Grading depth grows with ``level`` so that refinement also resolves
    endpoint singularities.
    """
    if grade_levels is None:
        grade_levels = GRADE_LEVELS + 16 * level
    cuts = sorted(float(c) for c in breakpoints if lo < c < hi)
    pieces = list(zip([lo] + cuts, cuts + [hi]))
    all_breaks = []
    for a, b in pieces:
        ga = grade and np.isfinite(a)
        gb = grade and np.isfinite(b)
        if np.isfinite(a) and np.isfinite(b):
            n = base_panels * 2**level
            n = max(n, int(math.ceil((b - a) / max_panel)))
            all_breaks.append(_finite_piece(a, b, n, ga, gb, grade_levels))
        elif np.isfinite(a):
            all_breaks.append(_half_line_piece(
                a, 1.0, level, log_profile, log_eps, ga, base_panels, max_panel,
                grade_levels))
        elif np.isfinite(b):
            all_breaks.append(_half_line_piece(
                b, -1.0, level, log_profile, log_eps, gb, base_panels, max_panel,
                grade_levels)[::-1])
        else:
            c = peak_location(log_profile)
            left = _half_line_piece(c, -1.0, level, log_profile, log_eps, False,
                                    base_panels, max_panel, grade_levels)[::-1]
            right = _half_line_piece(c, 1.0, level, log_profile, log_eps, False,
                                     base_panels, max_panel, grade_levels)
            all_breaks.append(np.concatenate([left, right[1:]]))
    nodes, weights = [], []
    for br in all_breaks:
        x, w = rule_from_breaks(br, order)
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def integrate(fn, lo, hi, *, log_profile=None, breakpoints=(), rtol=1e-11,
              atol=1e-14, max_level=6, start_level=0, max_panel=np.inf,
              log_eps=LOG_EPS, grade=True):
    """Integrate ``fn`` over ``(lo, hi)`` by successive panel doubling.

    ``fn`` maps a node array of shape (J,) to values of shape (..., J); the
    result has shape (...).  Returns ``(value, error_estimate)`` where the
    estimate is the difference between the last two refinement levels.
    """
    if log_profile is None:
        log_profile = abs_log_profile(fn)
    previous = None
    err = np.inf
    for level in range(start_level, max_level + 1):
        x, w = layout(lo, hi, level, log_profile=log_profile, log_eps=log_eps,
                      breakpoints=breakpoints, max_panel=max_panel, grade=grade)
        value = np.asarray(fn(x)) @ w
        if previous is not None:
            err = np.max(np.abs(value - previous))
            scale = np.max(np.abs(value)) if np.size(value) else 0.0
            if err <= max(atol, rtol * scale):
                return value, err
        previous = value
    raise QuadratureNonConvergence(
        f"no convergence on ({lo}, {hi}) after {max_level} refinements "
        f"(last change {err:.3g})"
    )
