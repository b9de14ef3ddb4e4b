"""Numerical companion for Ricci-pinched hypersurfaces of the unit sphere.

Submodules:

``exterior``  forms on R^n, derivation extensions and the operator T_A^[p]
``pinching``  the bound b(n, k, H), its root lambda and classification
``shape``     Gauss-equation Ricci curvature, Bochner chain, pinched sampler
``clifford``  generalized Clifford tori and their equality band
``focal``     focal submanifolds, normal frames and radius functions
``tube``      tubes over focal submanifolds and their shape operators
``cli``       the ``ricci-pinch`` batch driver
"""

__version__ = "0.1.0"
