"""A priori estimates for slowly oscillating periodic solutions.

Wright's equation in exponential form is x'(t) = -alpha (e^{x(t-1)} - 1).
For a SOPS normalized so that x(0) = 0, x'(0) > 0 and x < 0 on (-1, 0),
classical arguments give global extrema bounds, iterated upper/lower
envelope functions (the ``p`` sequence), a bound on x over [-1, 0) (the
``a`` sequence), ranges for the first and second zero gaps q and qbar,
a minimum-depth bound, and a two-sided bound on qbar obtained from the
balance of the positive and negative parts of e^x - 1 over one period.
Everything here is evaluated in interval arithmetic so each estimate
encloses the exact quantity for every alpha in the input interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import directed as dr
from .gridfn import GridFn, grid_coord_up, grid_coord_dn, idx_floor, _up, _dn
from .interval import (
    HALF_PI,
    Interval,
    add_dn,
    add_up,
    div_dn,
    div_up,
    mul_dn,
    mul_up,
    sub_dn,
    sub_up,
)

_ONE = Interval.point(1.0)
_TWO = Interval.point(2.0)


@dataclass(frozen=True)
class AprioriParams:
    """Depths of the two bounding recurrences."""

    i0: int = 2
    j0: int = 20

    def __post_init__(self) -> None:
        if self.i0 < 1 or self.j0 < 1:
            raise ValueError("recurrence depths must be >= 1")


@dataclass(frozen=True)
class PeriodBoundTerms:
    """Directed integral bounds feeding the second-gap inequality."""

    u_plus: float
    l_plus: float
    u_minus_1: float
    l_minus_1: float
    m: float


def global_extrema(i_alpha: Interval) -> Interval:
    """Enclosure of [-alpha_max (e^{alpha_max} - 1), alpha_max].

    Contains x(t) for all t > 0 for every solution in the normalized
    class, uniformly over alpha in i_alpha.
    """
    if i_alpha.lo <= 0.0:
        raise ValueError("global_extrema requires alpha > 0")
    spread = i_alpha * (i_alpha.exp() - _ONE)
    return Interval(-spread.hi, i_alpha.hi)


def wright_rate(enc: GridFn, i_alpha: Interval, k0: int, k1: int
                ) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell enclosures of -alpha (e^{x(t-1)} - 1) for cells k0..k1.

    For each cell k the delayed argument t - 1 sweeps the closed cell
    k - n_time of ``enc``; the result arrays bound the rate over that
    whole sweep and over all alpha in i_alpha.
    """
    n = enc.n_time
    xlo, xhi = enc.comb_slice(k0 - n, k1 - n)
    flo = dr.vsub_dn(dr.vexp_dn(xlo), 1.0)
    fhi = dr.vsub_up(dr.vexp_up(xhi), 1.0)
    return dr.interval_mul(-i_alpha.hi, -i_alpha.lo, flo, fhi)


def _p1(i_alpha: Interval, a: int, b: int, n_time: int) -> GridFn:
    """The linear first envelope alpha * t on grid indices [a, b]."""
    idxs = np.arange(a, b + 1, dtype=float)
    nlo, nhi = dr.interval_mul(i_alpha.lo, i_alpha.hi, idxs, idxs)
    plo = dr.vdiv_pos_dn(nlo, n_time)
    phi = dr.vdiv_pos_up(nhi, n_time)
    clo = np.minimum(plo[:-1], plo[1:])
    chi = np.maximum(phi[:-1], phi[1:])
    return GridFn(n_time, a, plo, phi, clo, chi, Interval.entire())


def integrate_from_zero(glo: np.ndarray, ghi: np.ndarray, a: int, b: int,
                        n_time: int, ambient: Interval) -> GridFn:
    """Enclosure of F(t) = int_0^t g(s) ds from per-cell integrand bounds.

    ``glo``/``ghi`` bound g over the closed cells a..b-1.  Point values
    use directed cumulative sums from 0 in both directions; each cell
    value hulls F over the whole open cell (partial-cell contributions
    between 0 and a full step), intersecting the enclosures obtained
    from the cell's two bounding points.
    """
    if not (a <= 0 <= b):
        raise ValueError("integration domain must contain 0")
    zero = -a
    dlo = dr.scale_pos_dn(1, n_time, glo)
    dhi = dr.scale_pos_up(1, n_time, ghi)
    plo = np.zeros(b - a + 1)
    phi = np.zeros(b - a + 1)
    if b > 0:
        plo[zero + 1:] = dr.vcumsum_dn(dlo[zero:])
        phi[zero + 1:] = dr.vcumsum_up(dhi[zero:])
    if a < 0:
        plo[:zero] = -dr.vcumsum_up(dhi[:zero][::-1])[::-1]
        phi[:zero] = -dr.vcumsum_dn(dlo[:zero][::-1])[::-1]
    neg = np.minimum(dlo, 0.0)
    pos = np.maximum(dhi, 0.0)
    clo = np.maximum(dr.vadd_dn(plo[:-1], neg), dr.vsub_dn(plo[1:], pos))
    chi = np.minimum(dr.vadd_up(phi[:-1], pos), dr.vsub_up(phi[1:], neg))
    return GridFn(n_time, a, plo, phi, clo, chi, ambient)


def p_fn(i_alpha: Interval, i: int, i_lo: int, i_hi: int, n_time: int) -> GridFn:
    """Enclosure of the i-th envelope function on grid [i_lo/n, i_hi/n].

    p_1(t) = alpha t and p_{k+1}(t) = -alpha int_0^t (e^{p_k(s-1)} - 1) ds.
    Every normalized SOPS satisfies x(t) > inf p_i for t < 0,
    x(t) < sup p_i for t in (0, 1], and x(t) < sup p_i(1) for all t >= 0.
    All iterates are computed by grid integration; the closed forms of
    the first two serve as test oracles only.
    """
    if i < 1:
        raise ValueError("envelope index must be >= 1")
    if i_hi > n_time:
        raise ValueError("envelope domain must stay within t <= 1")
    if not (i_lo <= 0 <= i_hi):
        raise ValueError("envelope domain must contain 0")
    cur = _p1(i_alpha, i_lo - (i - 1) * n_time, i_hi, n_time)
    for k in range(1, i):
        a = i_lo - (i - 1 - k) * n_time
        glo, ghi = wright_rate(cur, i_alpha, a, i_hi - 1)
        cur = integrate_from_zero(glo, ghi, a, i_hi, n_time, Interval.entire())
    return cur


def a_seq(i_alpha: Interval, j: int) -> Interval:
    """Interval iterate a_j of a_1 = -(alpha-1), a_{k+1} = alpha (e^{a_k} - 1).

    Bounds x(t) < -t * a_j(alpha) on [-1, 0) for every normalized SOPS
    with second gap >= 3.
    """
    if j < 1:
        raise ValueError("recurrence depth must be >= 1")
    a = -(i_alpha - _ONE)
    for _ in range(j - 1):
        a = i_alpha * (a.exp() - _ONE)
    return a


def q_qbar_ranges(i_alpha: Interval, j0: int) -> tuple[Interval, Interval]:
    """Ranges of the first and second zero gaps over alpha in i_alpha."""
    if i_alpha.lo < HALF_PI.lo:
        raise ValueError("gap ranges require alpha >= pi/2")
    t = i_alpha + (-i_alpha).exp() - _ONE
    expr = t / (t.exp() - _ONE) / i_alpha
    q_lo = (_ONE + expr).lo
    if i_alpha.lo >= 2.0:
        q_hi = 2.0
    else:
        q_hi = (_TWO + _ONE / Interval.point(i_alpha.lo)).hi
    qbar_lo = (_ONE + _ONE / Interval.point(i_alpha.hi)).lo
    ratio = (i_alpha.exp() - _ONE) / (a_seq(i_alpha, j0).exp() - _ONE)
    qbar_hi = max(3.0, (_TWO + abs(ratio)).hi)
    return Interval(q_lo, q_hi), Interval(qbar_lo, qbar_hi)


def walther_min(i_alpha: Interval) -> float:
    """Sound discard threshold for the minimum-depth test.

    Every SOPS at alpha >= pi/2 satisfies min x <= -log(alpha / (pi/2)).
    A region whose certain lower bound at the minimum exceeds this
    threshold for every alpha in i_alpha contains no SOPS.  Returned is
    an upper bound of -log(alpha_min / (pi/2)), the direction that keeps
    the discard test conservative.
    """
    if i_alpha.lo < HALF_PI.lo:
        raise ValueError("threshold requires alpha >= pi/2")
    v = -((Interval.point(i_alpha.lo) / HALF_PI).log())
    return v.hi


def _upper_window_sum(arr: np.ndarray, n_time: int) -> float:
    s = math.fsum(arr.tolist())
    if math.isinf(s):
        return s
    return mul_up(_up(s), grid_coord_up(1, n_time))


def _lower_window_sum(arr: np.ndarray, n_time: int) -> float:
    s = math.fsum(arr.tolist())
    if math.isinf(s):
        return s
    return max(0.0, mul_dn(_dn(s), grid_coord_dn(1, n_time)))


def period_bound_terms(f: GridFn, i_q: Interval) -> PeriodBoundTerms:
    """Directed integral bounds over every placement of the zero gap q.

    The candidate window positions cover q anywhere in i_q with the
    window endpoints snapped outward to the grid, so each term bounds
    its supremum/infimum over q.  All four integrands are nonnegative.
    """
    n = f.n_time
    k0 = idx_floor(i_q.lo, n)
    k1 = idx_floor(i_q.hi, n)
    span_lo, span_hi = k0 - n, k1 + n
    comb_lo, comb_hi = f.comb_slice(span_lo, span_hi)
    # sup / inf over each closed cell of the four clamped integrands
    up_pos = np.maximum(dr.vsub_up(dr.vexp_up(comb_hi), 1.0), 0.0)
    lo_pos = np.maximum(dr.vsub_dn(dr.vexp_dn(comb_lo), 1.0), 0.0)
    up_neg = np.maximum(dr.vsub_up(1.0, dr.vexp_dn(comb_lo)), 0.0)
    lo_neg = np.maximum(dr.vsub_dn(1.0, dr.vexp_up(comb_hi)), 0.0)

    def cells(arr, a, b):
        return arr[a - span_lo:b - span_lo + 1]

    u_plus, u_minus_1 = 0.0, 0.0
    l_plus, l_minus_1 = math.inf, math.inf
    for k in range(k0, k1 + 1):
        u_plus = max(u_plus, _upper_window_sum(cells(up_pos, k - n, k), n))
        u_minus_1 = max(u_minus_1, _upper_window_sum(cells(up_neg, k, k + n), n))
        l_plus = min(l_plus, _lower_window_sum(cells(lo_pos, k + 1 - n, k - 1), n))
        l_minus_1 = min(l_minus_1, _lower_window_sum(cells(lo_neg, k + 1, k + n - 1), n))
    m = f.inf_over(add_dn(i_q.lo, 1.0), add_up(i_q.hi, 1.0))
    return PeriodBoundTerms(u_plus, l_plus, u_minus_1, l_minus_1, m)


def period_bound(f: GridFn, i_q: Interval) -> tuple[float, float]:
    """Two-sided bound on the second zero gap qbar of a SOPS.

    Requires the caller's SOPS class to satisfy qbar >= 2 and ``f`` to
    enclose x on [i_q.lo - 1, i_q.hi + 1] and at t = -1.  Returns
    (qbar_lo, qbar_hi); qbar_hi is +inf when the upper bound on x at
    t = -1 is not strictly negative (degenerate denominator).
    """
    terms = period_bound_terms(f, i_q)
    one = _ONE

    num_lo = sub_dn(terms.l_plus, terms.u_minus_1)
    den_m = abs(Interval.point(terms.m).exp() - one)
    if num_lo >= 0.0:
        lo_val = 0.0 if den_m.hi <= 0.0 else div_dn(num_lo, den_m.hi)
    elif den_m.lo > 0.0:
        lo_val = div_dn(num_lo, den_m.lo)
    else:
        lo_val = -math.inf
    qbar_lo = add_dn(2.0, lo_val)

    u1 = f.point(-f.n_time).hi  # upper bound of x at t = -1
    if u1 >= 0.0:
        return qbar_lo, math.inf
    den_u = abs(Interval.point(u1).exp() - one)
    if den_u.lo <= 0.0:
        return qbar_lo, math.inf
    num_hi = sub_up(terms.u_plus, terms.l_minus_1)
    if num_hi >= 0.0:
        hi_val = div_up(num_hi, den_u.lo)
    else:
        hi_val = div_up(num_hi, den_u.hi)
    qbar_hi = add_up(2.0, hi_val)
    return qbar_lo, qbar_hi
