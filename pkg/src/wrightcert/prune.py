"""Six-step region contractor.

Each step tightens the region's box coordinates or its bounding
functions, or detects that the region cannot contain the reduction
triple of any SOPS.  Soundness: if a SOPS x at some alpha in the
region's parameter interval has its triple inside the box and lies
between the bounding functions, the same holds after every step.  No
step ever widens anything, so steps can run in any order and any number
of times.

Steps:
  1. sign pattern: a normalized SOPS is nonnegative on [0, q] and on
     the periodic pre/post images of that arc, nonpositive on [q, L]
     and its images; clamp the bounds accordingly and intersect the
     peak value at t = 1 with the box's i_m side.
  2. variation of parameters: x(t0 +/- s) = x(t0) -/+ integral of
     alpha (e^{x(r-1)} - 1); one rigorous step of size <= 1/n refines
     every grid point and cell from its neighbor (Jacobi-style, all
     reads from the pre-step enclosure).
  3. zero location and peak: shrink i_q by scanning where the lower
     bound allows a sign change, and intersect i_m with the enclosure
     at t = 1.
  4. periodicity: intersect the enclosure with the hull of its own
     translates over the period range i_l.
  5. infeasibility: an empty intersection anywhere proves there is no
     SOPS with triple in the box.
  6. minimum depth: every SOPS at alpha >= pi/2 dips at least as low as
     -log(alpha/(pi/2)) somewhere in q + [1, 1]; a lower bound that
     stays above the threshold is a contradiction.
"""

from __future__ import annotations

import numpy as np

from . import apriori
from . import directed as dr
from .gridfn import GridFn, idx_above, idx_below, idx_ceil, idx_floor, \
    grid_coord_dn, grid_coord_up
from .interval import Interval, add_dn, add_up
from .region import Region


def _clamp_ranges(n: int, windows, i_lo: int, i_hi: int):
    """Point/cell index ranges fully inside each real window, clipped."""
    pts = []
    cells = []
    for a, b in windows:
        if a > b:
            continue
        pa, pb = idx_ceil(a, n), idx_floor(b, n)
        pts.append((max(pa, i_lo), min(pb, i_hi)))
        ca, cb = pa, pb - 1
        cells.append((max(ca, i_lo), min(cb, i_hi - 1)))
    return pts, cells


def step1_sign(r: Region) -> Region:
    """Clamp the bounds to the sign pattern of a SOPS and its translates."""
    if r.infeasible:
        return r
    enc = r.enclosure
    n = enc.n_time
    q_min, q_max = r.i_q.lo, r.i_q.hi
    qb_min, qb_max = r.i_qbar.lo, r.i_qbar.hi
    l_min, l_max = r.i_l.lo, r.i_l.hi

    neg_windows = [(-qb_min, 0.0), (q_max, l_min)]
    pos_windows = [(-l_min, -qb_max), (0.0, q_min),
                   (l_max, add_dn(l_min, q_min))]

    phi = enc.point_hi.copy()
    chi = enc.cell_hi.copy()
    plo = enc.point_lo.copy()
    clo = enc.cell_lo.copy()
    base = enc.i_lo

    pts, cells = _clamp_ranges(n, neg_windows, enc.i_lo, enc.i_hi)
    for a, b in pts:
        if a <= b:
            np.minimum(phi[a - base:b - base + 1], 0.0,
                       out=phi[a - base:b - base + 1])
    for a, b in cells:
        if a <= b:
            np.minimum(chi[a - base:b - base + 1], 0.0,
                       out=chi[a - base:b - base + 1])
    pts, cells = _clamp_ranges(n, pos_windows, enc.i_lo, enc.i_hi)
    for a, b in pts:
        if a <= b:
            np.maximum(plo[a - base:b - base + 1], 0.0,
                       out=plo[a - base:b - base + 1])
    for a, b in cells:
        if a <= b:
            np.maximum(clo[a - base:b - base + 1], 0.0,
                       out=clo[a - base:b - base + 1])

    # peak value: intersect the t = 1 point value with the box side
    k1 = n - base
    if 0 <= k1 < len(phi):
        phi[k1] = min(phi[k1], r.i_m.hi)
        plo[k1] = max(plo[k1], r.i_m.lo)

    if (plo > phi).any() or (clo > chi).any():
        return r.mark_infeasible()
    return r.with_enclosure(GridFn(n, enc.i_lo, plo, phi, clo, chi,
                                   enc.ambient))


def _chain_min(p: np.ndarray, d_up: np.ndarray) -> np.ndarray:
    """Upper bounds of the recurrence u_k = min(p_k, u_{k-1} + d_{k-1}).

    Telescopes to min over m <= k of p_m + sum(d_m .. d_{k-1}); computed
    with outward-rounded prefix sums and a running minimum, so each
    output bounds the exact recurrence value from above.
    """
    s_up = np.concatenate(([0.0], dr.vcumsum_up(d_up)))
    s_dn = np.concatenate(([0.0], dr.vcumsum_dn(d_up)))
    run = np.minimum.accumulate(dr.vsub_up(p, s_dn))
    return np.minimum(p, dr.vadd_up(s_up, run))


def _chain_max(p: np.ndarray, d_dn: np.ndarray) -> np.ndarray:
    """Lower bounds of the recurrence l_k = max(p_k, l_{k-1} + d_{k-1})."""
    s_up = np.concatenate(([0.0], dr.vcumsum_up(d_dn)))
    s_dn = np.concatenate(([0.0], dr.vcumsum_dn(d_dn)))
    run = np.maximum.accumulate(dr.vsub_dn(p, s_up))
    return np.maximum(p, dr.vadd_dn(s_dn, run))


def step2_integrate(r: Region, window: tuple[int, int] | None = None) -> Region:
    """One rigorous integration sweep refining points and cells.

    For every grid point t0 in the window, the enclosure propagates one
    step forward and backward with the rate enclosure of
    -alpha (e^{x(t0 - 1 +/- [0, 1/n])} - 1).  Because a refined point is
    immediately a valid base for the next step, the single-step bounds
    compose transitively along the window; the composed (in-place sweep)
    refinement is computed in closed form as a min-plus prefix chain in
    each direction.  Rates always come from the pre-step enclosure.
    Cell values hull the propagated bound over every intermediate time.
    All candidates intersect the pre-step values; nothing ever widens.
    """
    if r.infeasible:
        return r
    enc = r.enclosure
    n = enc.n_time
    base = enc.i_lo
    j0, j1 = window if window is not None else (enc.i_lo, enc.i_hi)
    j0 = max(j0, enc.i_lo)
    j1 = min(j1, enc.i_hi)
    if j0 > j1:
        return r

    # per-cell rates for cells j0-1 .. j1 (cell c pairs with the delayed
    # closed cell c - n); cell c serves the forward step from point c,
    # the backward step from point c+1, and both of cell c's candidates
    rall_lo, rall_hi = apriori.wright_rate(enc, r.alpha, j0 - 1, j1)
    d_hi = dr.scale_pos_up(1, n, rall_hi)   # upper of (1/n) * rate
    d_lo = dr.scale_pos_dn(1, n, rall_lo)

    phi = enc.point_hi.copy()
    plo = enc.point_lo.copy()

    # forward chains over points j0 .. min(j1+1, i_hi)
    k_hi = min(j1 + 1, enc.i_hi)
    if k_hi > j0:
        sl = slice(j0 - base, k_hi - base + 1)
        cells = slice(j0 - (j0 - 1), k_hi - 1 - (j0 - 1) + 1)  # rate index
        phi[sl] = _chain_min(phi[sl], d_hi[cells])
        plo[sl] = _chain_max(plo[sl], d_lo[cells])
    # backward chains over points min->max reversed: j1 down to max(j0-1, i_lo)
    k_lo = max(j0 - 1, enc.i_lo)
    if k_lo < j1:
        sl = slice(k_lo - base, j1 - base + 1)
        cells = slice(k_lo - (j0 - 1), j1 - 1 - (j0 - 1) + 1)
        # reversing turns u_{k-1} = min(p, u_k - d_lo) into a forward chain
        phi[sl] = _chain_min(phi[sl][::-1], -d_lo[cells][::-1])[::-1]
        plo[sl] = _chain_max(plo[sl][::-1], -d_hi[cells][::-1])[::-1]

    # cell candidates from the refined points on both sides
    c0 = max(j0 - 1, enc.i_lo)
    c1 = min(j1, enc.i_hi - 1)
    chi = enc.cell_hi.copy()
    clo = enc.cell_lo.copy()
    if c0 <= c1:
        sl = slice(c0 - base, c1 - base + 1)
        rc = slice(c0 - (j0 - 1), c1 - (j0 - 1) + 1)
        dh = d_hi[rc]
        dl = d_lo[rc]
        left = slice(c0 - base, c1 - base + 1)
        right = slice(c0 + 1 - base, c1 + 1 - base + 1)
        chi[sl] = np.minimum.reduce([
            chi[sl],
            dr.vadd_up(phi[left], np.maximum(dh, 0.0)),
            dr.vsub_up(phi[right], np.minimum(dl, 0.0)),
        ])
        clo[sl] = np.maximum.reduce([
            clo[sl],
            dr.vadd_dn(plo[left], np.minimum(dl, 0.0)),
            dr.vsub_dn(plo[right], np.maximum(dh, 0.0)),
        ])

    if (plo > phi).any() or (clo > chi).any():
        return r.mark_infeasible()
    return r.with_enclosure(GridFn(n, enc.i_lo, plo, phi, clo, chi,
                                   enc.ambient))


def step3_zero_and_max(r: Region) -> Region:
    """Shrink i_q to where a sign change remains possible; refine i_m."""
    if r.infeasible:
        return r
    enc = r.enclosure
    n = enc.n_time
    a, b = r.i_q.lo, r.i_q.hi
    pa, pb = idx_ceil(a, n), idx_floor(b, n)
    ca, cb = idx_above(a, n) - 1, idx_below(b, n)
    plo_s, phi_s = enc.points_slice(pa, pb) if pa <= pb else (np.empty(0),) * 2
    clo_s, chi_s = enc.cells_slice(ca, cb) if ca <= cb else (np.empty(0),) * 2

    # q'_min: first location in i_q where the lower bound allows x <= 0
    new_lo = np.inf
    ok = plo_s <= 0.0
    if ok.any():
        i = pa + int(np.argmax(ok))
        new_lo = min(new_lo, max(grid_coord_dn(i, n), a))
    ok = clo_s <= 0.0
    if ok.any():
        i = ca + int(np.argmax(ok))
        new_lo = min(new_lo, max(grid_coord_dn(i, n), a))
    # q'_max: last location in i_q where the upper bound allows x >= 0
    new_hi = -np.inf
    ok = phi_s >= 0.0
    if ok.any():
        i = pb - int(np.argmax(ok[::-1]))
        new_hi = max(new_hi, min(grid_coord_up(i, n), b))
    ok = chi_s >= 0.0
    if ok.any():
        i = cb - int(np.argmax(ok[::-1]))
        new_hi = max(new_hi, min(grid_coord_up(i + 1, n), b))
    if not (new_lo <= new_hi):
        return r.mark_infeasible()

    new_im = r.i_m.intersect(enc.point(n))
    if new_im is None:
        return r.mark_infeasible()
    from dataclasses import replace
    return replace(r, i_q=Interval(new_lo, new_hi), i_m=new_im)


def step4_periodicity(r: Region) -> Region:
    """Intersect the enclosure with the hull of its period translates."""
    if r.infeasible:
        return r
    enc = r.enclosure
    i_l = r.i_l
    n = enc.n_time
    # A shift window at least as wide as the stored domain hulls
    # everything with ambient and cannot tighten anything.
    w = idx_ceil(i_l.hi, n) - idx_floor(i_l.lo, n)
    if w >= enc.i_hi - enc.i_lo:
        return r
    shifted = enc.shift_hull(i_l)
    refined = enc.refine_pointwise(shifted)
    if refined is None:
        return r.mark_infeasible()
    return r.with_enclosure(refined)


def step5_infeasible(r: Region) -> bool:
    """True iff a refinement emptied some stored interval."""
    return r.infeasible


def step6_walther(r: Region) -> bool:
    """True iff the region violates the minimum-depth bound."""
    if r.infeasible:
        return True
    lo = r.enclosure.inf_over(add_dn(r.i_q.lo, 1.0), add_up(r.i_q.hi, 1.0))
    return lo > apriori.walther_min(r.alpha)


def prune(r: Region, n_iter: int) -> Region | None:
    """Run steps 1..6 in order, n_iter full passes; None when empty.

    The output region and enclosure are subsets of the input's, and any
    SOPS whose triple was inside the input box is still inside the
    output box with its trajectory inside the output enclosure.
    """
    if n_iter < 1:
        raise ValueError("n_iter must be >= 1")
    for _ in range(n_iter):
        r = step1_sign(r)
        if r.infeasible:
            return None
        r = step2_integrate(r)
        if r.infeasible:
            return None
        r = step3_zero_and_max(r)
        if r.infeasible:
            return None
        r = step4_periodicity(r)
        if step5_infeasible(r):
            return None
        if step6_walther(r):
            return None
    return r
