"""Filter banks, transfer operators, and multiresolution checks.

Subpackages by theme:

- ``code_space``: exact shift/transfer operator algebra on cylinder functions
- ``ifs_filters``: filter-bank construction, verification, loop-group actions
- ``circle_filters``: Laurent-polynomial multirate algebra on the circle
- ``classic_mra``: cascade scaling functions and the line filter-bank pipeline
- ``solenoid``: path-space moments and unitary dilation checks
- ``rkhs_kernels``: positive-definite kernel conditions on finite point sets
- ``examples_geometry``: logistic-map quadrature and affine fractal sampling
- ``cli``: the ``wavelab`` command-line front end
"""

from .code_space import CylinderFn, IfsSpec, Word

__all__ = ["CylinderFn", "IfsSpec", "Word"]
__version__ = "0.1.0"
