"""Finite-volume simulator for chemotaxis-consumption systems with degenerate
diffusion, plus a harness that checks strictly positive data never develop a
dead-core before blow-up."""

from .errors import (
    BlowUpError,
    CFLViolation,
    ConfigError,
    CoverageError,
    DomainError,
    PreconditionError,
    SimulationError,
    SolverError,
)
from .grid import GridSpec
from .model import ModelSpec

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "CFLViolation",
    "ConfigError",
    "CoverageError",
    "DomainError",
    "GridSpec",
    "ModelSpec",
    "PreconditionError",
    "SimulationError",
    "SolverError",
]
