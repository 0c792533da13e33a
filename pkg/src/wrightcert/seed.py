"""Construction of the initial exhaustive region pair.

For a parameter interval the union of the two seed regions contains the
reduction triple (q, qbar, x(1)) of every normalized SOPS: the *short*
seed covers qbar <= 3 using the classical gap and peak estimates, the
*long* seed covers qbar >= 3 where much sharper envelope bounds apply.
The long seed additionally runs a few pruning refinements on a small
working window and then contracts its qbar side with the period-balance
inequality; when the contracted upper bound falls below 3 no SOPS with
qbar >= 3 exists at all and the long seed is empty.
"""

from __future__ import annotations

import math

import numpy as np

from . import directed as dr
from .apriori import (
    AprioriParams,
    a_seq,
    global_extrema,
    p_fn,
    period_bound,
    q_qbar_ranges,
)
from .gridfn import GridFn
from .interval import HALF_PI, Interval, add_up
from .prune import step1_sign, step2_integrate, step3_zero_and_max
from .region import Region

_ONE = Interval.point(1.0)
_TWO = Interval.point(2.0)

# Half-width of the working window used for the long seed's refinement
# sweep; covers the [-4, 4] integration range plus the gap windows.
_WORK_HALF = 6


def _domain_indices(q_hi: float, qbar_hi: float, n_time: int) -> tuple[int, int]:
    """Stored index range [-(ceil(L_max)+2), ceil(L_max)+ceil(q_max)+2]."""
    l_max = add_up(q_hi, qbar_hi)
    left = -(math.ceil(l_max) + 2) * n_time
    right = (math.ceil(l_max) + math.ceil(q_hi) + 2) * n_time
    return left, right


def _a_bound_arrays(aj: Interval, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Upper bounds sup(-t * a_j) at points and cells of [-1, 0)."""
    i_pts = np.arange(-n, 0, dtype=float)
    _, pt_num = dr.interval_mul(aj.lo, aj.hi, -i_pts, -i_pts)
    pt_hi = dr.vdiv_pos_up(pt_num, n)
    _, cell_num = dr.interval_mul(aj.lo, aj.hi, -(i_pts + 1.0), -i_pts)
    cell_hi = dr.vdiv_pos_up(cell_num, n)
    return pt_hi, cell_hi


def _long_enclosure(pf: GridFn, aj: Interval, lo_const: float, m_hi: float,
                    d_lo: int, d_hi: int, n: int) -> GridFn | None:
    """Initial bounds for the long seed: 0 at t=0, envelope for t<0,
    the [-1, 0) bound from the a-recurrence, constants elsewhere.

    None when the pieces already contradict each other (which proves
    there is no SOPS with qbar >= 3 for this parameter interval).
    """
    npts = d_hi - d_lo + 1
    plo = np.full(npts, lo_const)
    phi = np.full(npts, m_hi)
    clo = np.full(npts - 1, lo_const)
    chi = np.full(npts - 1, m_hi)
    z = -d_lo  # array position of grid index 0
    # lower envelope for t < 0
    plo[:z] = pf.points_slice(d_lo, -1)[0]
    clo[:z] = pf.cells_slice(d_lo, -1)[0]
    # upper bound on [-1, 0)
    pt_a, cell_a = _a_bound_arrays(aj, n)
    phi[z - n:z] = np.minimum(phi[z - n:z], pt_a)
    chi[z - n:z] = np.minimum(chi[z - n:z], cell_a)
    # pinned zero at t = 0
    plo[z] = 0.0
    phi[z] = 0.0
    if (plo > phi).any() or (clo > chi).any():
        return None
    return GridFn(n, d_lo, plo, phi, clo, chi, Interval(lo_const, m_hi))


def seed_short(i_alpha: Interval, p: AprioriParams, n_time: int) -> Region:
    """Region containing every SOPS triple with second gap <= 3."""
    if i_alpha.lo < HALF_PI.lo:
        raise ValueError("short seed requires alpha >= pi/2")
    i_q, _ = q_qbar_ranges(i_alpha, p.j0)
    i_qbar = Interval((_ONE + _ONE / Interval.point(i_alpha.hi)).lo, 3.0)
    m_min = (_ONE + (i_alpha / HALF_PI).log() / i_alpha).log().lo
    pf = p_fn(i_alpha, p.i0, 0, n_time, n_time)
    m_hi = pf.point(n_time).hi
    i_m = Interval(m_min, m_hi)
    bounds = Interval(global_extrema(i_alpha).lo, m_hi)
    d_lo, d_hi = _domain_indices(i_q.hi, 3.0, n_time)
    enc = GridFn.constant(n_time, d_lo, d_hi, bounds, ambient=bounds)
    enc = enc.with_point(0, Interval(0.0, 0.0))
    return Region(i_q, i_qbar, i_m, i_alpha, enc)


def seed_long(i_alpha: Interval, p: AprioriParams, n_time: int,
              n_period: int) -> Region | None:
    """Region containing every SOPS triple with second gap >= 3, or None.

    None means the construction proved no such SOPS exists for any
    alpha in the interval.  The full-size enclosure is allocated only
    after the period-balance contraction of the qbar side, since the
    coarse upper bound grows like e^alpha.
    """
    if i_alpha.lo <= 1.0:
        raise ValueError("long seed requires alpha > 1")
    n = n_time
    t_expr = i_alpha + (-i_alpha).exp() - _ONE
    q_lo = (_ONE + t_expr / (t_expr.exp() - _ONE) / i_alpha).lo
    q_hi = (_TWO + _ONE / Interval.point(i_alpha.lo)).hi
    i_q = Interval(q_lo, q_hi)
    aj = a_seq(i_alpha, p.j0)
    ratio = (i_alpha.exp() - _ONE) / (aj.exp() - _ONE)
    qbar_hi = (_TWO + abs(ratio)).hi
    if qbar_hi < 3.0:
        return None
    i_qbar = Interval(3.0, qbar_hi)
    glob_lo = global_extrema(i_alpha).lo

    # working enclosure around the origin, refined n_period times
    pf_w = p_fn(i_alpha, p.i0, -_WORK_HALF * n, n, n)
    m_hi = pf_w.point(n).hi
    i_m = Interval(0.0, m_hi)
    enc_w = _long_enclosure(pf_w, aj, glob_lo, m_hi,
                            -_WORK_HALF * n, _WORK_HALF * n, n)
    if enc_w is None:
        return None
    r = Region(i_q, i_qbar, i_m, i_alpha, enc_w)
    r = step1_sign(r)
    if r.infeasible:
        return None
    for _ in range(n_period):
        r = step2_integrate(r, window=(-4 * n, 4 * n))
        if r.infeasible:
            return None
    r = step3_zero_and_max(r)
    if r.infeasible:
        return None

    qb_lo, qb_hi = period_bound(r.enclosure, r.i_q)
    qb_hi = min(qb_hi, qbar_hi)
    qb_lo = max(3.0, qb_lo)
    if qb_hi < 3.0 or qb_lo > qb_hi:
        return None

    d_lo, d_hi = _domain_indices(r.i_q.hi, qb_hi, n)
    pf = p_fn(i_alpha, p.i0, d_lo, n, n)
    enc = _long_enclosure(pf, aj, glob_lo, m_hi, d_lo, d_hi, n)
    if enc is None:
        return None
    enc = enc.overlay_intersect(r.enclosure)
    if enc is None:
        return None
    return Region(r.i_q, Interval(qb_lo, qb_hi), r.i_m, i_alpha, enc)


def seed_pair(i_alpha: Interval, p: AprioriParams, n_time: int,
              n_period: int) -> list[Region]:
    """The exhaustive initial worklist: short seed plus long seed if any."""
    out = [seed_short(i_alpha, p, n_time)]
    long_seed = seed_long(i_alpha, p, n_time, n_period)
    if long_seed is not None:
        out.append(long_seed)
    return out
