"""Rectangles in the 3-dimensional reduction space, with enclosures.

A normalized SOPS x is summarized by the triple (q, qbar, x(1)): the
first zero gap, the second zero gap, and the peak value.  A
:class:`Region` is a rectangle i_q x i_qbar x i_m of such triples
together with the parameter interval and an attached interval-valued
bounding function: whenever a SOPS at some alpha in ``alpha`` has its
triple inside the rectangle, its trajectory lies inside ``enclosure``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .gridfn import GridFn
from .interval import Interval


@dataclass(frozen=True)
class Region:
    """A box in reduction space with its bounding-function enclosure.

    ``infeasible`` is set by pruning steps when a refinement produces an
    empty intersection somewhere; such a region contains no SOPS triple
    and is discarded by the caller.
    """

    i_q: Interval
    i_qbar: Interval
    i_m: Interval
    alpha: Interval
    enclosure: GridFn
    infeasible: bool = False

    def __post_init__(self) -> None:
        if self.i_q.lo <= 1.0 or self.i_qbar.lo <= 1.0:
            raise ValueError(
                "slow oscillation requires both zero gaps > 1, got "
                f"i_q={self.i_q}, i_qbar={self.i_qbar}")

    @property
    def i_l(self) -> Interval:
        """Period range: i_q + i_qbar, recomputed from the current sides."""
        return self.i_q + self.i_qbar

    def diameter(self) -> float:
        """Max side width (infinity-norm diameter)."""
        return max(self.i_q.width(), self.i_qbar.width(), self.i_m.width())

    def subdivide(self) -> tuple["Region", "Region"]:
        """Bisect at the midpoint of the widest side.

        Ties break toward the lowest coordinate index (q, then qbar,
        then m).  Children share this region's enclosure and alpha; the
        union of the children covers this region exactly.
        """
        sides = (self.i_q, self.i_qbar, self.i_m)
        widths = [s.width() for s in sides]
        j = widths.index(max(widths))
        if widths[j] <= 0.0:
            raise ValueError("cannot subdivide a point region")
        side = sides[j]
        mid = side.mid()
        if not (side.lo < mid < side.hi):
            raise ValueError(f"side {side} too thin to bisect")
        lo_half = Interval(side.lo, mid)
        hi_half = Interval(mid, side.hi)
        names = ("i_q", "i_qbar", "i_m")
        a = replace(self, **{names[j]: lo_half})
        b = replace(self, **{names[j]: hi_half})
        return a, b

    def is_terminal(self, eps1: float, eps2: float) -> bool:
        """Stop-splitting test with a looser tolerance for long periods.

        Short-period regions (qbar entirely below 3) stop at eps1; the
        rest stop at eps2.
        """
        d = self.diameter()
        if self.i_qbar.hi < 3.0:
            return d < eps1
        return d < eps2

    def with_enclosure(self, enc: GridFn) -> "Region":
        return replace(self, enclosure=enc)

    def mark_infeasible(self) -> "Region":
        return replace(self, infeasible=True)

    def coords(self) -> dict:
        """Plain record of the box coordinates for certificates."""
        return {
            "q_lo": self.i_q.lo, "q_hi": self.i_q.hi,
            "qbar_lo": self.i_qbar.lo, "qbar_hi": self.i_qbar.hi,
            "m_lo": self.i_m.lo, "m_hi": self.i_m.hi,
        }
