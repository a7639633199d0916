"""Lie symmetries and invariant solutions of the rotating stratified Boussinesq system."""

from .model import GridField, GridSpec, Jet, PhysicalParams
from .reduced import ReducedConstants, amplitude_bound, integrate_phi, period
from .solution import InvariantSolution, solve_invariant
from .symmetry import catalog, catalog_f0, determining_residual, lie_bracket, prolong

__version__ = "0.1.0"

__all__ = [
    "GridField",
    "GridSpec",
    "InvariantSolution",
    "Jet",
    "PhysicalParams",
    "ReducedConstants",
    "amplitude_bound",
    "catalog",
    "catalog_f0",
    "determining_residual",
    "integrate_phi",
    "lie_bracket",
    "period",
    "prolong",
    "solve_invariant",
]
