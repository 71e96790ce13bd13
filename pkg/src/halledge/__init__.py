"""Edge currents of two-edge quantum Hall strips and cylinders."""

from .potentials import ConfiningPotential
from .fiber import Grid, GridPolicy, EigenPair, solve_fiber
from .oracle import ParabolicModel, hermite, landau_psi
from .dispersion import DispersionCurve, EnergyWindow, trace_curves

__all__ = [
    "ConfiningPotential",
    "Grid",
    "GridPolicy",
    "EigenPair",
    "solve_fiber",
    "ParabolicModel",
    "hermite",
    "landau_psi",
    "DispersionCurve",
    "EnergyWindow",
    "trace_curves",
]

__version__ = "0.1.0"
