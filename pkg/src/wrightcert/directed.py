"""Vectorized directed-rounding kernels for the grid machinery.

numpy analogues of the scalar helpers in :mod:`wrightcert.interval`.
The ``*_up`` variants return arrays that bound the exact results from
above, the ``*_dn`` variants from below.  Additions use the exact
TwoSum error term to skip the nudge when the float result is exact;
multiplications nudge unconditionally (one ulp of slack is irrelevant
next to the cell widths these feed into).
"""

from __future__ import annotations

import numpy as np

_INF = np.inf
_U = 2.0 ** -53  # unit roundoff of binary64

# Margin for numpy's SIMD exp, in ulps; validated against a
# high-precision oracle in the tests.
VEC_EXP_ULPS = 4

_TINY = 1e-300


def nudge_up(a: np.ndarray) -> np.ndarray:
    return np.nextafter(a, _INF)


def nudge_dn(a: np.ndarray) -> np.ndarray:
    return np.nextafter(a, -_INF)


def vadd_up(a, b) -> np.ndarray:
    s = np.add(a, b)
    bv = s - a
    err = (a - (s - bv)) + (b - bv)
    # err is NaN where s is infinite; comparisons are False there, and
    # nextafter(-inf) saturates to -realmax, which bounds any overflowed
    # finite sum from above.
    need = (err > 0.0) | np.isneginf(s)
    return np.where(need, np.nextafter(s, _INF), s)


def vadd_dn(a, b) -> np.ndarray:
    s = np.add(a, b)
    bv = s - a
    err = (a - (s - bv)) + (b - bv)
    need = (err < 0.0) | np.isposinf(s)
    return np.where(need, np.nextafter(s, -_INF), s)


def vsub_up(a, b) -> np.ndarray:
    return vadd_up(a, np.negative(b))


def vsub_dn(a, b) -> np.ndarray:
    return vadd_dn(a, np.negative(b))


def vmul_up(a, b) -> np.ndarray:
    p = np.multiply(a, b)
    p = np.where(np.isnan(p), 0.0, p)  # 0 * inf: zero factor wins
    return np.nextafter(p, _INF)


def vmul_dn(a, b) -> np.ndarray:
    p = np.multiply(a, b)
    p = np.where(np.isnan(p), 0.0, p)
    return np.nextafter(p, -_INF)


def vexp_up(a) -> np.ndarray:
    v = np.exp(a)
    out = v.copy()
    small = (out > 0.0) & (out < _TINY)
    out[small] *= 2.0
    rest = out >= _TINY
    for _ in range(VEC_EXP_ULPS):
        out[rest] = np.nextafter(out[rest], _INF)
    return out


def vexp_dn(a) -> np.ndarray:
    v = np.exp(a)
    out = v.copy()
    out[out < _TINY] = 0.0
    rest = np.isfinite(out) & (out >= _TINY)
    for _ in range(VEC_EXP_ULPS):
        out[rest] = np.nextafter(out[rest], -_INF)
    np.maximum(out, 0.0, out=out)
    out[np.isposinf(v)] = np.nextafter(_INF, 0.0)
    return out


def vcumsum_up(terms: np.ndarray) -> np.ndarray:
    """Upper bounds of all prefix sums of ``terms``."""
    c = np.cumsum(terms)
    amag = np.cumsum(np.abs(terms))
    k = np.arange(1, len(terms) + 1, dtype=float)
    bound = (4.0 * _U) * k * amag
    return np.nextafter(c + bound, _INF)


def vcumsum_dn(terms: np.ndarray) -> np.ndarray:
    """Lower bounds of all prefix sums of ``terms``."""
    c = np.cumsum(terms)
    amag = np.cumsum(np.abs(terms))
    k = np.arange(1, len(terms) + 1, dtype=float)
    bound = (4.0 * _U) * k * amag
    return np.nextafter(c - bound, -_INF)


def interval_mul(alo, ahi, blo, bhi) -> tuple[np.ndarray, np.ndarray]:
    """Elementwise interval product [alo,ahi] * [blo,bhi]."""
    lo = np.minimum.reduce([
        vmul_dn(alo, blo), vmul_dn(alo, bhi),
        vmul_dn(ahi, blo), vmul_dn(ahi, bhi),
    ])
    hi = np.maximum.reduce([
        vmul_up(alo, blo), vmul_up(alo, bhi),
        vmul_up(ahi, blo), vmul_up(ahi, bhi),
    ])
    return lo, hi


def _rat_bounds(num: int, den: int) -> tuple[float, float]:
    from fractions import Fraction

    q = num / den
    if Fraction(q) == Fraction(num, den):
        return q, q
    return np.nextafter(q, -_INF), np.nextafter(q, _INF)


def scale_pos_up(num: int, den: int, arr) -> np.ndarray:
    """Upper bound of (num/den) * arr for positive integers num, den."""
    q_dn, q_up = _rat_bounds(num, den)
    return np.where(arr >= 0.0, vmul_up(q_up, arr), vmul_up(q_dn, arr))


def scale_pos_dn(num: int, den: int, arr) -> np.ndarray:
    """Lower bound of (num/den) * arr for positive integers num, den."""
    q_dn, q_up = _rat_bounds(num, den)
    return np.where(arr >= 0.0, vmul_dn(q_dn, arr), vmul_dn(q_up, arr))


def vdiv_pos_up(arr, den: int) -> np.ndarray:
    """Upper bound of arr / den for a positive integer den."""
    return np.nextafter(np.divide(arr, den), _INF)


def vdiv_pos_dn(arr, den: int) -> np.ndarray:
    """Lower bound of arr / den for a positive integer den."""
    return np.nextafter(np.divide(arr, den), -_INF)
