"""Intrinsic torsion of almost Robinson structures.

The package computes, for a Lorentzian metric presented by a Robinson coframe
in coordinates, the irreducible pieces of the intrinsic torsion of the
associated almost Robinson structure, decides membership in every invariant
class, and reports the geometry of the underlying null congruence.
"""

__version__ = "0.1.0"
