"""Simulation and stability certification for a semilinear railway-track beam."""

from .params import BeamParams, validate_params, admissible_c_max

__version__ = "0.1.0"

__all__ = ["BeamParams", "validate_params", "admissible_c_max", "__version__"]
