"""Spherical tessellations of S^3, their symmetry groups, and numerically
minimized Lawson surfaces."""

__version__ = "0.1.0"

from . import angles, s3, lattice, groups, plateau, surface, objio, suite  # noqa: F401
from .lattice import Lattice, UnsupportedParametersError  # noqa: F401
from .suite import RunConfig, run_suite  # noqa: F401
