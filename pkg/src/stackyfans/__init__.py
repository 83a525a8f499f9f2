"""Executable dictionary for toric stacks described by stacky fans.

Layers, bottom to top:

* :mod:`stackyfans.zlinalg` -- exact integer matrices, Smith/Hermite forms.
* :mod:`stackyfans.fgab` -- finitely generated abelian groups, homs, and the
  dual mapping-cone group attached to a lattice map.
* :mod:`stackyfans.polyhedral` -- rational cones and fans with exact
  arithmetic.
* :mod:`stackyfans.stacky` -- stacky fans, morphisms, quotient presentations.
* :mod:`stackyfans.constructions` -- fantastacks, canonical stacks, good
  moduli space checks, moduli interpretations, gerbe splittings.
* :mod:`stackyfans.cli` -- JSON-driven command line front end.
"""

__version__ = "0.1.0"
