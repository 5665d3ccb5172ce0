"""Experiments with group-twisted recurrence, Bohr sets and invariant polynomials on Z^N.

Submodules: ``reals`` (exact and tracked-precision torus coordinates),
``matgroup`` (integer matrix groups and representations), ``walks``
(random walks and Cesaro averages of characters), ``bohr`` (Kronecker
systems, Bohr sets, densities), ``patterns`` (invariant maps and witness
searches), ``recurrence`` (region algebra and twisted recurrence),
``experiments``/``cli`` (batch runner) and ``acceptance``.
"""

__version__ = "0.1.0"
