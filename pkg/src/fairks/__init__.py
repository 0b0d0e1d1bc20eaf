"""Aggregation-diffusion equations in the fair-competition regime.

Radial kernels and potentials, free energies, stationary states of the
rescaled fast-diffusion problem, and a one-dimensional gradient-flow solver.
"""

from .domain import Frame, InvalidArgument, Params, RadialDensity, Regime, classify

__all__ = ["Frame", "InvalidArgument", "Params", "RadialDensity", "Regime", "classify"]
__version__ = "0.1.0"
