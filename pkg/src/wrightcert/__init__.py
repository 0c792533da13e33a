"""Rigorous certification of uniqueness of slowly oscillating periodic
solutions (SOPS) of Wright's equation over parameter intervals.

The engine encloses every possible SOPS with interval-valued bounding
functions, shrinks the enclosures by branch-and-prune over a
3-dimensional reduction space (first zero gap, second zero gap, peak
value), and bounds the moduli of all nontrivial Floquet multipliers
below 1, which certifies asymptotic stability and hence uniqueness.
"""

from .interval import Interval
from .gridfn import GridFn
from .region import Region
from .prover import ProofConfig, ProofCertificate, prove_interval, sweep

__all__ = [
    "Interval",
    "GridFn",
    "Region",
    "ProofConfig",
    "ProofCertificate",
    "prove_interval",
    "sweep",
]

__version__ = "0.1.0"
