"""Exact Koopman eigenfunctions for polynomial ODEs from invariant manifolds.

Builds eigenvalue/eigenfunction pairs as power products of invariant-
manifold generating functions, assembles closed-form solutions for
planar systems, and cross-checks everything both symbolically and
against an adaptive integrator.
"""

__version__ = "0.1.0"

from . import algebra, sysparse  # noqa: F401
