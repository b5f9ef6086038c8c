"""Finite-precision dyadic arithmetic, generalized Walsh functions and Walsh transforms.

A dyadic rational is a finite set of bit indices ``n`` with ``|x| = sum 2**(-n-1)``;
index ``-1`` is the units bit, index ``0`` the halves bit.  Addition is the
bitwise exclusive or, multiplication the carry-less convolution of bit
sequences, and the generalized Walsh function is ``(-1)**pi_{-1}(y*t)``.

On the grid of cells of width ``2**-m_frac`` covering ``[0, 2**M_int)`` cells
are encoded as integers ``code = floor(y * 2**m_frac)``; bit ``n`` of the
dyadic expansion sits at position ``m_frac - 1 - n`` of the code.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import quad
from .errors import Overflow, ParameterOutOfRange, TailTooHeavy

DEFAULT_M_INT = 8
DEFAULT_M_FRAC = 16


@dataclass(frozen=True)
class DyadicRational:
    bits: frozenset
    M_int: int = DEFAULT_M_INT
    m_frac: int = DEFAULT_M_FRAC

    def __post_init__(self):
        bits = frozenset(int(n) for n in self.bits)
        bad = [n for n in bits if not -self.M_int <= n < self.m_frac]
        if bad:
            raise Overflow(f"bit indices {sorted(bad)} outside [{-self.M_int}, {self.m_frac})")
        object.__setattr__(self, "bits", bits)

    @property
    def value(self):
        return math.fsum(math.ldexp(1.0, -n - 1) for n in self.bits)

    def __float__(self):
        return self.value

    @property
    def code(self):
        """Integer cell code at this number's own capacity."""
        return sum(1 << (self.m_frac - 1 - n) for n in self.bits)

    def __repr__(self):
        return f"DyadicRational({self.value!r}, bits={sorted(self.bits)})"


def from_real(x, M_int=DEFAULT_M_INT, m_frac=DEFAULT_M_FRAC):
    """Greatest dyadic rational <= x representable with the given capacity."""
    if x < 0:
        raise ParameterOutOfRange(f"dyadic numbers are nonnegative, got {x}")
    if x >= 2.0**M_int:
        raise Overflow(f"{x} does not fit below 2**{M_int}")
    code = math.floor(math.ldexp(x, m_frac))
    return from_code(code, M_int, m_frac)


def from_code(code, M_int=DEFAULT_M_INT, m_frac=DEFAULT_M_FRAC):
    code = int(code)
    if not 0 <= code < 1 << (M_int + m_frac):
        raise Overflow(f"code {code} outside capacity ({M_int}, {m_frac})")
    bits = frozenset(m_frac - 1 - p for p in range(code.bit_length()) if code >> p & 1)
    return DyadicRational(bits, M_int, m_frac)


def dyadic_add(x, y):
    """Dyadic sum: exclusive or of the bit sets."""
    return DyadicRational(x.bits ^ y.bits, max(x.M_int, y.M_int), max(x.m_frac, y.m_frac))


def dyadic_mul(x, y, M_int=None, m_frac=None):
    """Carry-less product ``z_n = sum_{i+j=n} x_i y_j (mod 2)``.

    The default capacity is wide enough for any product of the operands.
    """
    M_int = x.M_int + y.M_int if M_int is None else M_int
    m_frac = x.m_frac + y.m_frac if m_frac is None else m_frac
    z = set()
    for i in x.bits:
        for j in y.bits:
            z ^= {i + j}
    return DyadicRational(frozenset(z), M_int, m_frac)


def walsh_eval(y, t):
    """Generalized Walsh function ``Psi_y(t)``, exactly +1 or -1."""
    z = dyadic_mul(y, t)
    return -1 if -1 in z.bits else 1


def dyadic_derivative_partial(f, x, n, j_start=0):
    """Finite dyadic difference ``sum_{j=j_start}^{n-1} 2**(j-1) (f(x) - f(x + 2**(-j-1)))``.

    ``j_start=0`` is the one-sided difference; a negative ``j_start`` also
    includes translations by ``2**(-j-1) >= 1``, which is what reaches the
    fractional bits of a Walsh frequency.
    """
    fx = f(x)
    total = 0.0
    for j in range(j_start, n):
        step = DyadicRational(frozenset([j]), x.M_int, x.m_frac)
        total += math.ldexp(fx - f(dyadic_add(x, step)), j - 1)
    return total


# Grid machinery -----------------------------------------------------------

def cell_midpoints(M_int=DEFAULT_M_INT, m_frac=DEFAULT_M_FRAC):
    codes = np.arange(1 << (M_int + m_frac), dtype=np.int64)
    return (codes + 0.5) * 2.0**-m_frac


def walsh_mask(t, M_int, m_frac):
    """Integer mask selecting the y-cell bits paired with the bits of ``t``.

    ``Psi_y(t) = (-1)**popcount(code(y) & mask)`` for every y-cell.  Bits of t
    below index ``-m_frac`` would need sub-cell resolution in y.
    """
    mask = 0
    for j in t.bits:
        if j < -m_frac:
            raise Overflow(f"t={t.value} needs y resolution finer than 2**-{m_frac}")
        if j < M_int:
            mask |= 1 << (m_frac + j)
    return mask


def walsh_signs(masks, M_int=DEFAULT_M_INT, m_frac=DEFAULT_M_FRAC):
    """Matrix of Walsh signs, one row per mask, one column per y-cell."""
    codes = np.arange(1 << (M_int + m_frac), dtype=np.int64)
    masks = np.asarray(masks, dtype=np.int64).reshape(-1, 1)
    parity = np.bitwise_count(codes[None, :] & masks) & 1
    return 1 - 2 * parity.astype(np.int8)


def _as_dyadic(t, M_int, m_frac):
    if isinstance(t, DyadicRational):
        return t
    # the transform variable lives on cells of width 2**-M_int below 2**m_frac
    return from_real(float(t), m_frac, M_int)


def tail_mass(f, M_int, rtol=1e-6):
    """Estimate of ``int_{2**M_int}^inf |f|``."""
    try:
        value, _ = quad.integrate(lambda y: np.abs(f(y)), 2.0**M_int, np.inf, rtol=rtol,
                                  atol=1e-300)
    except Exception as exc:  # nondecaying tails surface as quadrature failures
        raise TailTooHeavy(f"tail of f beyond 2**{M_int} is not integrable: {exc}") from exc
    return float(value)


def walsh_transform(f, t, m_frac=DEFAULT_M_FRAC, M_int=DEFAULT_M_INT, tail_tol=1e-8):
    """Walsh-Fourier transform ``int_0^inf f(y) Psi_y(t) dy`` by the dyadic midpoint rule.

    Returns ``(value, tail)``; ``tail`` bounds the contribution of
    ``[2**M_int, inf)`` that the grid does not see.
    """
    ts = t if isinstance(t, (list, tuple, np.ndarray)) else [t]
    masks = [walsh_mask(_as_dyadic(s, M_int, m_frac), M_int, m_frac) for s in ts]
    vals = np.asarray(f(cell_midpoints(M_int, m_frac)), dtype=float)
    out = (walsh_signs(masks, M_int, m_frac) @ vals) * 2.0**-m_frac
    tail = tail_mass(f, M_int)
    if tail > tail_tol * max(1.0, np.abs(vals).sum() * 2.0**-m_frac):
        raise TailTooHeavy(f"tail mass {tail:.3g} beyond 2**{M_int} exceeds tolerance")
    if not isinstance(t, (list, tuple, np.ndarray)):
        return float(out[0]), tail
    return out, tail


def fwht(values):
    """Unnormalized fast Walsh-Hadamard transform along the last axis (natural order)."""
    a = np.array(values, dtype=float)
    n = a.shape[-1]
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    lead = a.shape[:-1]
    h = 1
    while h < n:
        a = a.reshape(lead + (n // (2 * h), 2, h))
        x = a[..., 0, :].copy()
        y = a[..., 1, :]
        a[..., 0, :] += y
        a[..., 1, :] = x - y
        h *= 2
    return a.reshape(lead + (n,))


def bit_reverse(codes, nbits):
    codes = np.asarray(codes, dtype=np.int64)
    out = np.zeros_like(codes)
    for p in range(nbits):
        out |= ((codes >> p) & 1) << (nbits - 1 - p)
    return out


def walsh_transform_grid(values, M_int=DEFAULT_M_INT, m_frac=DEFAULT_M_FRAC):
    """Walsh transform of cell values on the whole dual grid.

    ``values`` (..., 2**(M_int+m_frac)) are cell values of f on ``[0, 2**M_int)``
    with cells ``2**-m_frac``; the result holds f-hat on ``[0, 2**m_frac)`` with
    cells ``2**-M_int``, in increasing t order.
    """
    nbits = M_int + m_frac
    h = fwht(values)
    order = bit_reverse(np.arange(1 << nbits), nbits)
    return h[..., order] * 2.0**-m_frac


def grid_norm(values, cell, p):
    values = np.abs(np.asarray(values))
    if np.isinf(p):
        return float(values.max())
    return float((np.sum(values**p) * cell) ** (1 / p))
