"""Piecewise-constant interval-valued functions on a uniform grid.

A :class:`GridFn` represents an interval-valued function F on the grid
``{i / n_time}``: it stores one interval per grid *point* and one per
open *cell* between consecutive points,

    F(t) = point value at i    if t == i/n_time,
    F(t) = cell value at i     if t in (i/n_time, (i+1)/n_time),

over a finite index range; outside the stored range the function takes
the ``ambient`` interval.  Keeping point values distinct from cell
values lets integration refine the value *at* a grid point more sharply
than the value over the preceding open cell, whose stored interval must
hull the enclosure for every intermediate time.

All reductions (suprema, hulls, Riemann sums, shifts) are conservative:
window endpoints are compared against grid coordinates in exact rational
arithmetic, and sums are rounded outward, so every result bounds the
exact one.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .interval import Interval, mul_dn, mul_up, _up, _dn

_INF = math.inf


# -- exact grid/real comparisons ---------------------------------------


def idx_floor(x: float, n: int) -> int:
    """Largest integer i with i/n <= x."""
    return math.floor(Fraction(x) * n)


def idx_ceil(x: float, n: int) -> int:
    """Smallest integer i with i/n >= x."""
    return math.ceil(Fraction(x) * n)


def idx_below(x: float, n: int) -> int:
    """Largest integer i with i/n < x."""
    return math.ceil(Fraction(x) * n) - 1


def idx_above(x: float, n: int) -> int:
    """Smallest integer i with i/n > x."""
    return math.floor(Fraction(x) * n) + 1


def grid_coord_dn(i: int, n: int) -> float:
    """Float <= i/n."""
    v = i / n
    return v if Fraction(v) <= Fraction(i, n) else _dn(v)


def grid_coord_up(i: int, n: int) -> float:
    """Float >= i/n."""
    v = i / n
    return v if Fraction(v) >= Fraction(i, n) else _up(v)


def _window_max(arr: np.ndarray, w: int) -> np.ndarray:
    """out[i] = max(arr[i : i + w]); len(out) == len(arr) - w + 1."""
    if w == 1:
        return arr
    f = maximum_filter1d(arr, size=w, mode="constant", cval=-_INF)
    return f[w // 2 : w // 2 + len(arr) - w + 1]


def _window_min(arr: np.ndarray, w: int) -> np.ndarray:
    if w == 1:
        return arr
    f = minimum_filter1d(arr, size=w, mode="constant", cval=_INF)
    return f[w // 2 : w // 2 + len(arr) - w + 1]


class GridFnError(ValueError):
    pass


class GridFn:
    """An interval-valued step function on the 1/n_time grid.

    Instances are immutable; refinements return new values, which makes
    them safe to share between regions and across workers.
    """

    __slots__ = ("n_time", "i_lo", "point_lo", "point_hi", "cell_lo",
                 "cell_hi", "ambient")

    def __init__(self, n_time: int, i_lo: int,
                 point_lo, point_hi, cell_lo, cell_hi,
                 ambient: Interval):
        if n_time < 1:
            raise GridFnError(f"n_time must be positive, got {n_time}")
        point_lo = np.ascontiguousarray(point_lo, dtype=float)
        point_hi = np.ascontiguousarray(point_hi, dtype=float)
        cell_lo = np.ascontiguousarray(cell_lo, dtype=float)
        cell_hi = np.ascontiguousarray(cell_hi, dtype=float)
        if len(point_lo) != len(point_hi) or len(cell_lo) != len(cell_hi):
            raise GridFnError("mismatched endpoint array lengths")
        if len(point_lo) < 1 or len(cell_lo) != len(point_lo) - 1:
            raise GridFnError("need k points and k-1 cells, k >= 1")
        for name, lo, hi in (("point", point_lo, point_hi),
                             ("cell", cell_lo, cell_hi)):
            if np.isnan(lo).any() or np.isnan(hi).any():
                raise GridFnError(f"NaN in {name} values")
            if (lo > hi).any():
                bad = int(np.argmax(lo > hi))
                raise GridFnError(
                    f"inverted {name} interval at index {i_lo + bad}: "
                    f"[{lo[bad]}, {hi[bad]}]")
        for a in (point_lo, point_hi, cell_lo, cell_hi):
            a.setflags(write=False)
        self.n_time = n_time
        self.i_lo = i_lo
        self.point_lo = point_lo
        self.point_hi = point_hi
        self.cell_lo = cell_lo
        self.cell_hi = cell_hi
        self.ambient = ambient

    # -- construction ---------------------------------------------------

    @staticmethod
    def constant(n_time: int, i_lo: int, i_hi: int, value: Interval,
                 ambient: Interval | None = None) -> "GridFn":
        """Constant function == value on [i_lo/n, i_hi/n]."""
        npts = i_hi - i_lo + 1
        return GridFn(
            n_time, i_lo,
            np.full(npts, value.lo), np.full(npts, value.hi),
            np.full(npts - 1, value.lo), np.full(npts - 1, value.hi),
            ambient if ambient is not None else value)

    def replace(self, point_lo=None, point_hi=None, cell_lo=None,
                cell_hi=None, ambient=None) -> "GridFn":
        return GridFn(
            self.n_time, self.i_lo,
            self.point_lo if point_lo is None else point_lo,
            self.point_hi if point_hi is None else point_hi,
            self.cell_lo if cell_lo is None else cell_lo,
            self.cell_hi if cell_hi is None else cell_hi,
            self.ambient if ambient is None else ambient)

    def with_point(self, i: int, value: Interval) -> "GridFn":
        """Copy with the point value at grid index i replaced."""
        if not (self.i_lo <= i <= self.i_hi):
            raise GridFnError(f"point index {i} outside [{self.i_lo}, {self.i_hi}]")
        plo = self.point_lo.copy()
        phi = self.point_hi.copy()
        plo[i - self.i_lo] = value.lo
        phi[i - self.i_lo] = value.hi
        return self.replace(point_lo=plo, point_hi=phi)

    # -- queries ----------------------------------------------------------

    @property
    def i_hi(self) -> int:
        return self.i_lo + len(self.point_lo) - 1

    @property
    def delta(self) -> float:
        return 1.0 / self.n_time

    def point(self, i: int) -> Interval:
        """Value at the grid point i/n_time (ambient outside the domain)."""
        if self.i_lo <= i <= self.i_hi:
            k = i - self.i_lo
            return Interval(float(self.point_lo[k]), float(self.point_hi[k]))
        return self.ambient

    def cell(self, i: int) -> Interval:
        """Value on the open cell (i/n, (i+1)/n) (ambient outside)."""
        if self.i_lo <= i < self.i_hi:
            k = i - self.i_lo
            return Interval(float(self.cell_lo[k]), float(self.cell_hi[k]))
        return self.ambient

    def points_slice(self, a: int, b: int) -> tuple[np.ndarray, np.ndarray]:
        """(lo, hi) arrays of point values for indices a..b, ambient-filled."""
        return self._fill(self.point_lo, self.point_hi, self.i_lo, a, b,
                          self.ambient.lo, self.ambient.hi)

    def cells_slice(self, a: int, b: int) -> tuple[np.ndarray, np.ndarray]:
        """(lo, hi) arrays of cell values for indices a..b, ambient-filled."""
        return self._fill(self.cell_lo, self.cell_hi, self.i_lo, a, b,
                          self.ambient.lo, self.ambient.hi)

    @staticmethod
    def _fill(lo_arr, hi_arr, base, a, b, fill_lo, fill_hi):
        m = b - a + 1
        if m <= 0:
            return np.empty(0), np.empty(0)
        lo = np.full(m, fill_lo, dtype=float)
        hi = np.full(m, fill_hi, dtype=float)
        s0 = max(a, base)
        s1 = min(b, base + len(lo_arr) - 1)
        if s0 <= s1:
            lo[s0 - a:s1 - a + 1] = lo_arr[s0 - base:s1 - base + 1]
            hi[s0 - a:s1 - a + 1] = hi_arr[s0 - base:s1 - base + 1]
        return lo, hi

    def comb_slice(self, a: int, b: int) -> tuple[np.ndarray, np.ndarray]:
        """Hulls over the *closed* cells [i/n, (i+1)/n] for i = a..b.

        The closed-cell hull joins the open-cell value with both bounding
        point values; it is the enclosure of F over every time in the
        closed cell, which is what rigorous Riemann sums integrate.
        """
        clo, chi = self.cells_slice(a, b)
        plo, phi = self.points_slice(a, b + 1)
        lo = np.minimum(clo, np.minimum(plo[:-1], plo[1:]))
        hi = np.maximum(chi, np.maximum(phi[:-1], phi[1:]))
        return lo, hi

    # -- evaluation ------------------------------------------------------

    def eval(self, t: Interval) -> Interval:
        """Hull of F over the closed time window t (Appendix-style rule).

        Collects the point values with t.lo <= i/n <= t.hi and the cell
        values whose open cell meets [t.lo, t.hi], hulled with ambient
        for any part of the window outside the stored domain.
        """
        if math.isinf(t.lo) or math.isinf(t.hi):
            lo = min(float(self.point_lo.min()), float(self.cell_lo.min()),
                     self.ambient.lo)
            hi = max(float(self.point_hi.max()), float(self.cell_hi.max()),
                     self.ambient.hi)
            return Interval(lo, hi)
        n = self.n_time
        pa, pb = idx_ceil(t.lo, n), idx_floor(t.hi, n)
        ca, cb = idx_above(t.lo, n) - 1, idx_below(t.hi, n)
        lo, hi = _INF, -_INF
        used_ambient = False
        if pa <= pb:
            s0, s1 = max(pa, self.i_lo), min(pb, self.i_hi)
            if s0 <= s1:
                lo = min(lo, float(self.point_lo[s0 - self.i_lo:s1 - self.i_lo + 1].min()))
                hi = max(hi, float(self.point_hi[s0 - self.i_lo:s1 - self.i_lo + 1].max()))
            if pa < self.i_lo or pb > self.i_hi:
                used_ambient = True
        if ca <= cb:
            s0, s1 = max(ca, self.i_lo), min(cb, self.i_hi - 1)
            if s0 <= s1:
                lo = min(lo, float(self.cell_lo[s0 - self.i_lo:s1 - self.i_lo + 1].min()))
                hi = max(hi, float(self.cell_hi[s0 - self.i_lo:s1 - self.i_lo + 1].max()))
            if ca < self.i_lo or cb > self.i_hi - 1:
                used_ambient = True
        if used_ambient:
            lo = min(lo, self.ambient.lo)
            hi = max(hi, self.ambient.hi)
        if lo > hi:  # degenerate request (cannot happen for t.lo <= t.hi)
            return self.ambient
        return Interval(lo, hi)

    def sup_over(self, a: float, b: float) -> float:
        """Supremum of the upper bounding function over [a, b]."""
        return self.eval(Interval(a, b)).hi

    def inf_over(self, a: float, b: float) -> float:
        """Infimum of the lower bounding function over [a, b]."""
        return self.eval(Interval(a, b)).lo

    # -- refinement --------------------------------------------------------

    def refine_pointwise(self, other: "GridFn") -> "GridFn | None":
        """Cellwise and pointwise intersection; None when some piece is empty."""
        if other.n_time != self.n_time:
            raise GridFnError("refine_pointwise requires matching n_time")
        if other.i_lo != self.i_lo or other.i_hi != self.i_hi:
            raise GridFnError("refine_pointwise requires matching domains")
        plo = np.maximum(self.point_lo, other.point_lo)
        phi = np.minimum(self.point_hi, other.point_hi)
        clo = np.maximum(self.cell_lo, other.cell_lo)
        chi = np.minimum(self.cell_hi, other.cell_hi)
        if (plo > phi).any() or (clo > chi).any():
            return None
        amb = self.ambient.intersect(other.ambient)
        if amb is None:
            return None
        return GridFn(self.n_time, self.i_lo, plo, phi, clo, chi, amb)

    def overlay_intersect(self, other: "GridFn") -> "GridFn | None":
        """Intersect with ``other`` on the overlap of the stored domains.

        Outside other's domain this function is unchanged (other carries
        no information there).  None when the overlap turns empty.
        """
        if other.n_time != self.n_time:
            raise GridFnError("overlay_intersect requires matching n_time")
        a = max(self.i_lo, other.i_lo)
        b = min(self.i_hi, other.i_hi)
        if a > b:
            return self
        plo = self.point_lo.copy()
        phi = self.point_hi.copy()
        clo = self.cell_lo.copy()
        chi = self.cell_hi.copy()
        sp = slice(a - self.i_lo, b - self.i_lo + 1)
        op = slice(a - other.i_lo, b - other.i_lo + 1)
        plo[sp] = np.maximum(plo[sp], other.point_lo[op])
        phi[sp] = np.minimum(phi[sp], other.point_hi[op])
        if a < b:
            sc = slice(a - self.i_lo, b - self.i_lo)
            oc = slice(a - other.i_lo, b - other.i_lo)
            clo[sc] = np.maximum(clo[sc], other.cell_lo[oc])
            chi[sc] = np.minimum(chi[sc], other.cell_hi[oc])
        if (plo > phi).any() or (clo > chi).any():
            return None
        return self.replace(point_lo=plo, point_hi=phi, cell_lo=clo, cell_hi=chi)

    # -- shifting ---------------------------------------------------------

    def shift_hull(self, i_l: Interval, clip: bool = False) -> "GridFn":
        """G with G(t) containing hull over L in i_l of F(t + L).

        The shift window is covered by grid multiples (rounded outward),
        so the result is conservative but never smaller than the true
        hull.  With ``clip=True`` reads outside the stored domain are
        dropped instead of hulled with ambient; the caller must know the
        true window never leaves the domain.
        """
        if not (math.isfinite(i_l.lo) and math.isfinite(i_l.hi)):
            raise GridFnError("shift_hull requires a finite shift interval")
        n = self.n_time
        s_lo = idx_floor(i_l.lo, n)
        s_hi = idx_ceil(i_l.hi, n)
        w = s_hi - s_lo  # window size in cells, >= 0
        if clip:
            fill_lo, fill_hi = _INF, -_INF
        else:
            fill_lo, fill_hi = self.ambient.lo, self.ambient.hi

        def pts(a, b):
            return self._fill(self.point_lo, self.point_hi, self.i_lo,
                              a, b, fill_lo, fill_hi)

        def cls(a, b):
            return self._fill(self.cell_lo, self.cell_hi, self.i_lo,
                              a, b, fill_lo, fill_hi)

        npts = len(self.point_lo)
        # point output i: hull(points[i+s_lo .. i+s_hi], cells[i+s_lo .. i+s_hi-1])
        plo_ext, phi_ext = pts(self.i_lo + s_lo, self.i_hi + s_hi)
        out_p_lo = _window_min(plo_ext, w + 1)
        out_p_hi = _window_max(phi_ext, w + 1)
        if w >= 1:
            clo_ext, chi_ext = cls(self.i_lo + s_lo, self.i_hi + s_hi - 1)
            out_p_lo = np.minimum(out_p_lo, _window_min(clo_ext, w))
            out_p_hi = np.maximum(out_p_hi, _window_max(chi_ext, w))
        # cell output i: hull(points[i+s_lo+1 .. i+s_hi], cells[i+s_lo .. i+s_hi])
        if npts >= 2:
            clo_ext2, chi_ext2 = cls(self.i_lo + s_lo, self.i_hi - 1 + s_hi)
            out_c_lo = _window_min(clo_ext2, w + 1)
            out_c_hi = _window_max(chi_ext2, w + 1)
            if w >= 1:
                plo2, phi2 = pts(self.i_lo + s_lo + 1, self.i_hi - 1 + s_hi)
                out_c_lo = np.minimum(out_c_lo, _window_min(plo2, w))
                out_c_hi = np.maximum(out_c_hi, _window_max(phi2, w))
        else:
            out_c_lo = np.empty(0)
            out_c_hi = np.empty(0)
        if clip:
            # Positions whose whole clipped window missed the domain fall
            # back to ambient rather than an inverted +/-inf pair.
            bad = out_p_lo > out_p_hi
            out_p_lo = np.where(bad, self.ambient.lo, out_p_lo)
            out_p_hi = np.where(bad, self.ambient.hi, out_p_hi)
            if npts >= 2:
                badc = out_c_lo > out_c_hi
                out_c_lo = np.where(badc, self.ambient.lo, out_c_lo)
                out_c_hi = np.where(badc, self.ambient.hi, out_c_hi)
        return GridFn(n, self.i_lo, out_p_lo, out_p_hi, out_c_lo, out_c_hi,
                      self.ambient)

    # -- integration --------------------------------------------------------

    def _aligned_index(self, x: float, name: str) -> int:
        f = Fraction(x) * self.n_time
        if f.denominator != 1:
            raise GridFnError(f"{name}={x} is not a multiple of 1/{self.n_time}")
        return int(f)

    def riemann_upper(self, a: float, b: float) -> float:
        """Upper Riemann sum of the upper bounds over [a, b], step 1/n.

        a and b must be grid-aligned.  Together with
        :meth:`riemann_lower` this brackets the integral of every
        measurable selection x(t) in F(t).
        """
        ia = self._aligned_index(a, "a")
        ib = self._aligned_index(b, "b")
        if ia > ib:
            raise GridFnError(f"riemann window [{a}, {b}] is inverted")
        if ia == ib:
            return 0.0
        _, hi = self.comb_slice(ia, ib - 1)
        s = math.fsum(hi.tolist())
        if math.isinf(s):
            return s
        s = _up(s)
        top = mul_up(s, grid_coord_up(1, self.n_time))
        alt = mul_up(s, grid_coord_dn(1, self.n_time))
        return max(top, alt)

    def riemann_lower(self, a: float, b: float) -> float:
        ia = self._aligned_index(a, "a")
        ib = self._aligned_index(b, "b")
        if ia > ib:
            raise GridFnError(f"riemann window [{a}, {b}] is inverted")
        if ia == ib:
            return 0.0
        lo, _ = self.comb_slice(ia, ib - 1)
        s = math.fsum(lo.tolist())
        if math.isinf(s):
            return s
        s = _dn(s)
        bot = mul_dn(s, grid_coord_dn(1, self.n_time))
        alt = mul_dn(s, grid_coord_up(1, self.n_time))
        return min(bot, alt)

    # -- serialization --------------------------------------------------------

    def to_text(self) -> str:
        """Line-oriented dump: header then one line per grid index."""
        lines = [f"gridfn n_time={self.n_time} i_lo={self.i_lo} "
                 f"i_hi={self.i_hi} ambient={self.ambient.lo!r},{self.ambient.hi!r}"]
        for k in range(len(self.point_lo)):
            i = self.i_lo + k
            parts = [str(i), repr(float(self.point_lo[k])),
                     repr(float(self.point_hi[k]))]
            if k < len(self.cell_lo):
                parts += [repr(float(self.cell_lo[k])),
                          repr(float(self.cell_hi[k]))]
            lines.append(" ".join(parts))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "GridFn":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        head = lines[0].split()
        if head[0] != "gridfn":
            raise GridFnError("not a gridfn dump")
        kv = dict(part.split("=", 1) for part in head[1:])
        n_time = int(kv["n_time"])
        i_lo = int(kv["i_lo"])
        amb_lo, amb_hi = (float(v) for v in kv["ambient"].split(","))
        plo, phi, clo, chi = [], [], [], []
        for ln in lines[1:]:
            parts = ln.split()
            plo.append(float(parts[1]))
            phi.append(float(parts[2]))
            if len(parts) >= 5:
                clo.append(float(parts[3]))
                chi.append(float(parts[4]))
        return GridFn(n_time, i_lo, plo, phi, clo, chi,
                      Interval(amb_lo, amb_hi))

    def __repr__(self) -> str:
        return (f"GridFn(n_time={self.n_time}, domain=[{self.i_lo}/{self.n_time},"
                f" {self.i_hi}/{self.n_time}], {len(self.point_lo)} points)")
