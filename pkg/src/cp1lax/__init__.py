"""Numerical laboratory for the integrable sigma-model on the two-marked-point sphere.

Subpackages by role: ``lie`` (algebra data), ``curve`` (contour calculus and
inverse-dbar transforms), ``geometry`` (metric/3-form tensors), ``dynamics``
(lattice fields and the characteristic march), ``lax`` (spectral connection,
identity suite, charges), ``betaflow`` (RG flow checks), ``cli`` (experiment
runner).
"""
from . import betaflow, cli, curve, dynamics, geometry, lax, lie  # noqa: F401
from ._accel import HAVE_NUMBA  # noqa: F401

__version__ = "0.1.0"
