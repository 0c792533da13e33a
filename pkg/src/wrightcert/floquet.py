"""Bounds on Floquet multipliers of all SOPS mapping into a region.

For a SOPS x with period L, a nontrivial Floquet multiplier lambda
solves the linear delayed variational equation
y'(t) = -alpha e^{x(t-1)} y(t-1) together with the return condition
lambda h(t) = -y(L) x'(t+L)/x'(L) + y(t+L) on [-1, 0], where h = y on
[-1, 0] is the eigenfunction.  With sup|h| normalized to 1, |lambda| is
the sup over [-1, 0] of |z_L|, where z(t) = -y(L) x'(t)/x'(L) + y(t)
and z_L(t) = z(t + L).

This module propagates nonnegative upper-bound functions Y >= |y|,
Z >= |z| and Z_L >= |z_L| through upper Riemann sums over the region's
enclosure, producing a bound lambda_max >= |lambda| uniform over the
region.  If lambda_max < 1 on the first pass the multipliers are
explicitly bounded; otherwise the eigenfunction bound |h| <= min{1,
|z_L|} feeds back into Y, and a later pass with lambda_max < 1 proves
asymptotic stability by contradiction.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from . import directed as dr
from .gridfn import GridFn, _window_max, idx_ceil, idx_floor
from .interval import Interval, div_up, sub_up
from .region import Region

_AMBIENT = Interval(0.0, math.inf)


class OutcomeKind(enum.Enum):
    BOUNDED_STABLE = "BoundedStable"
    STABLE_BY_CONTRADICTION = "StableByContradiction"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class FloquetOutcome:
    kind: OutcomeKind
    lambda_max: float
    outer_iterations: int


@dataclass(frozen=True)
class FloquetState:
    """Current bound functions; lower bounds are pinned at 0 throughout."""

    y: GridFn
    z: GridFn | None = None
    zl: GridFn | None = None
    lambda_max: float = math.inf


class DegenerateDenominator(Exception):
    """Upper bound of the enclosure at t = -1 is not strictly negative."""


def init_y(n_time: int) -> GridFn:
    """Initial bound: |y| <= 1 on [-1, 0), y(0) = 0."""
    n = n_time
    phi = np.ones(n + 1)
    phi[-1] = 0.0
    return GridFn(n, -n, np.zeros(n + 1), phi, np.zeros(n), np.ones(n),
                  _AMBIENT)


def _integrand_comb(y: GridFn, enc: GridFn, k0: int, k1: int) -> np.ndarray:
    """sup over closed cells k0..k1 of Y(s-1) e^{x(s-1)}, elementwise.

    On each grid element (point, cell, point) of the delayed argument
    the actual pair (y, x) lies inside that element's boxes, so the sup
    of the product over the closed cell is the max of the per-element
    products of upper bounds (everything is nonnegative).
    """
    n = y.n_time
    ylo_p, yhi_p = y.points_slice(k0 - n, k1 - n + 1)
    ylo_c, yhi_c = y.cells_slice(k0 - n, k1 - n)
    xlo_p, xhi_p = enc.points_slice(k0 - n, k1 - n + 1)
    xlo_c, xhi_c = enc.cells_slice(k0 - n, k1 - n)
    w_p = dr.vmul_up(yhi_p, dr.vexp_up(xhi_p))
    w_c = dr.vmul_up(yhi_c, dr.vexp_up(xhi_c))
    return np.maximum(w_c, np.maximum(w_p[:-1], w_p[1:]))


def extend_y(st: FloquetState, r: Region) -> FloquetState:
    """Extend Y over [0, L_max] by upper Riemann sums of the delayed rate.

    |y(t)| = |int_0^t alpha e^{x(s-1)} y(s-1) ds| <= alpha_max * upper sum
    of Y(s-1) sup e^{x(s-1)}.  Processed in blocks of one delay length so
    each block's integrand only reads already-final values.
    """
    enc = r.enclosure
    n = enc.n_time
    top = idx_ceil(r.i_l.hi, n)
    alpha_up = r.alpha.hi

    npts = top + n + 1
    phi = np.zeros(npts)
    chi = np.zeros(npts - 1)
    core = st.y
    plo_c, phi_c = core.points_slice(-n, 0)
    clo_c, chi_c = core.cells_slice(-n, -1)
    phi[:n + 1] = phi_c
    chi[:n] = chi_c

    carry = 0.0  # upper bound of the integral accumulated so far
    k = 0
    while k < top:
        k_end = min(k + n, top)  # cells k .. k_end-1 of this block
        yblock = GridFn(n, -n, np.zeros(npts), phi.copy(),
                        np.zeros(npts - 1), chi.copy(), _AMBIENT)
        w = _integrand_comb(yblock, enc, k, k_end - 1)
        pref = dr.vadd_up(carry, dr.vcumsum_up(dr.scale_pos_up(1, n, w)))
        vals = dr.vmul_up(alpha_up, pref)
        # point k+1 .. k_end get the cumulative upper sums
        phi[n + k + 1:n + k_end + 1] = vals
        # cell m hulls Y over (t_m, t_{m+1}); the bound is nondecreasing,
        # so the right point value covers the whole open cell
        chi[n + k:n + k_end] = vals
        carry = float(pref[-1])
        k = k_end

    y_full = GridFn(n, -n, np.zeros(npts), phi, np.zeros(npts - 1), chi,
                    _AMBIENT)
    return replace(st, y=y_full)


def build_z(st: FloquetState, r: Region) -> FloquetState:
    """Z(t) = (max over the period range of Y) * sup |ratio| + Y(t).

    The ratio is (e^{x(t-1)} - 1) / (e^{x(-1)} - 1); the enclosure's
    upper bound at t = -1 must be strictly negative, otherwise the
    denominator is not bounded away from zero.
    """
    enc = r.enclosure
    n = enc.n_time
    y = st.y
    top = y.i_hi

    x_m1 = enc.point(-n)
    if x_m1.hi >= 0.0:
        raise DegenerateDenominator(
            f"enclosure at t=-1 has upper bound {x_m1.hi} >= 0")
    den = abs(x_m1.exp() - Interval.point(1.0))
    if den.lo <= 0.0:
        raise DegenerateDenominator("denominator not bounded away from 0")
    inv_den = div_up(1.0, den.lo)

    max_y = y.eval(r.i_l).hi

    def ratio_term(xlo, xhi):
        nlo = dr.vsub_dn(dr.vexp_dn(xlo), 1.0)
        nhi = dr.vsub_up(dr.vexp_up(xhi), 1.0)
        mag = np.maximum(np.abs(nlo), np.abs(nhi))
        return dr.vmul_up(max_y, dr.vmul_up(mag, inv_den))

    xlo_p, xhi_p = enc.points_slice(-n, top - n)
    xlo_c, xhi_c = enc.cells_slice(-n, top - n - 1)
    z_phi = dr.vadd_up(ratio_term(xlo_p, xhi_p), y.points_slice(0, top)[1])
    z_chi = dr.vadd_up(ratio_term(xlo_c, xhi_c), y.cells_slice(0, top - 1)[1])
    z = GridFn(n, 0, np.zeros(top + 1), z_phi, np.zeros(top), z_chi, _AMBIENT)
    return replace(st, z=z)


def build_zl(st: FloquetState, r: Region) -> FloquetState:
    """Z_L(t) = max over L in the period range of Z(t + L), on [-L_min, 0].

    The true read window stays inside Z's domain [0, L_max]; the grid
    cover of the shift may poke outside and is clipped.
    """
    z = st.z
    n = z.n_time
    i_l = r.i_l
    s_lo = idx_floor(i_l.lo, n)
    s_hi = idx_ceil(i_l.hi, n)
    w = s_hi - s_lo
    m_lo = idx_floor(-i_l.lo, n)  # leftmost point index of the Z_L domain

    def pts(a, b):
        return z._fill(z.point_hi, z.point_hi, z.i_lo, a, b, -np.inf, -np.inf)[1]

    def cls(a, b):
        return z._fill(z.cell_hi, z.cell_hi, z.i_lo, a, b, -np.inf, -np.inf)[1]

    npts = -m_lo + 1
    # point m: max(points[m+s_lo .. m+s_hi], cells[m+s_lo .. m+s_hi-1])
    p_ext = pts(m_lo + s_lo, s_hi)
    out_p = _window_max(p_ext, w + 1)
    if w >= 1:
        c_ext = cls(m_lo + s_lo, s_hi - 1)
        out_p = np.maximum(out_p, _window_max(c_ext, w))
    # cell m: max(cells[m+s_lo .. m+s_hi], points[m+s_lo+1 .. m+s_hi])
    c_ext2 = cls(m_lo + s_lo, -1 + s_hi)
    out_c = _window_max(c_ext2, w + 1)
    if w >= 1:
        p_ext2 = pts(m_lo + s_lo + 1, -1 + s_hi)
        out_c = np.maximum(out_c, _window_max(p_ext2, w))
    # positions whose whole clipped window missed the domain: trivial bound
    out_p = np.where(np.isneginf(out_p), np.inf, out_p)
    out_c = np.where(np.isneginf(out_c), np.inf, out_c)
    # Left of -L_min the translate can leave Z's domain, so the clipped
    # window is not a valid bound there; poison with the trivial bound.
    valid_from = idx_ceil(-i_l.lo, n)
    if valid_from > m_lo:
        out_p[:valid_from - m_lo] = np.inf
        out_c[:min(valid_from - m_lo, npts - 1)] = np.inf
    zl = GridFn(n, m_lo, np.zeros(npts), out_p, np.zeros(npts - 1), out_c,
                _AMBIENT)
    return replace(st, zl=zl, lambda_max=zl.sup_over(-1.0, 0.0))


def refine_zl(st: FloquetState, r: Region, m_floquet: int) -> FloquetState:
    """Backward refinement: |z_L(tau)| <= alpha_max int_tau^0 Z_L(s-1) sup e^{x(s-1)}.

    Applies on tau in [-(L_min - 1), 0] and never increases Z_L; repeated
    m_floquet times, each pass reading the previous pass's values.
    """
    enc = r.enclosure
    zl = st.zl
    n = zl.n_time
    alpha_up = r.alpha.hi
    v = sub_up(1.0, r.i_l.lo)  # >= 1 - L_min
    m_ref = idx_ceil(v, n)
    # reads touch Z_L down to m_ref - n; stay within the valid part
    m_ref = max(m_ref, idx_ceil(-r.i_l.lo, n) + n, zl.i_lo + n)
    if m_ref > 0:
        return st
    for _ in range(m_floquet):
        w = _integrand_comb(zl, enc, m_ref, -1)
        suff = dr.vcumsum_up(dr.scale_pos_up(1, n, w)[::-1])[::-1]
        cand = dr.vmul_up(alpha_up, suff)  # cand[j] bounds from point m_ref+j
        base = m_ref - zl.i_lo
        phi = zl.point_hi.copy()
        chi = zl.cell_hi.copy()
        phi[base:-1] = np.minimum(phi[base:-1], cand)
        phi[-1] = min(phi[-1], 0.0)  # z_L(0) = 0 exactly
        chi[base:] = np.minimum(chi[base:], cand)
        zl = GridFn(n, zl.i_lo, zl.point_lo, phi, zl.cell_lo, chi, _AMBIENT)
    return replace(st, zl=zl, lambda_max=zl.sup_over(-1.0, 0.0))


def _refine_y_core(st: FloquetState) -> GridFn:
    """Contradiction feedback: |h| <= min{1, Z_L} on [-1, 0], h(0) = 0."""
    zl = st.zl
    n = zl.n_time
    y_phi = np.minimum(st.y.points_slice(-n, 0)[1],
                       np.minimum(1.0, zl.points_slice(-n, 0)[1]))
    y_chi = np.minimum(st.y.cells_slice(-n, -1)[1],
                       np.minimum(1.0, zl.cells_slice(-n, -1)[1]))
    y_phi[-1] = 0.0
    return GridFn(n, -n, np.zeros(n + 1), y_phi, np.zeros(n), y_chi, _AMBIENT)


def floquet_bound(r: Region, n_floquet: int, m_floquet: int) -> FloquetOutcome:
    """Bound the modulus of every nontrivial Floquet multiplier over r.

    Returns BoundedStable with an explicit bound when the first pass
    already yields lambda_max < 1, StableByContradiction when a later
    pass does (stability proven without an explicit bound), and
    Inconclusive otherwise.
    """
    n = r.enclosure.n_time
    st = FloquetState(y=init_y(n))
    outer = 0
    lam = math.inf
    while True:
        try:
            st = extend_y(st, r)
            st = build_z(st, r)
            st = build_zl(st, r)
            st = refine_zl(st, r, m_floquet)
        except DegenerateDenominator:
            return FloquetOutcome(OutcomeKind.INCONCLUSIVE, math.inf, outer)
        lam = st.lambda_max
        if lam < 1.0:
            kind = (OutcomeKind.BOUNDED_STABLE if outer == 0
                    else OutcomeKind.STABLE_BY_CONTRADICTION)
            return FloquetOutcome(kind, lam, outer)
        if outer >= n_floquet:
            return FloquetOutcome(OutcomeKind.INCONCLUSIVE, lam, outer)
        st = replace(st, y=_refine_y_core(st))
        outer += 1
