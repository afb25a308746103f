"""Qubit magic-state computation schemes built from a Pauli phase convention."""
from .errors import CapacityError, DimensionError, ValidationError
from .pauli import (
    CliffordGate,
    PauliOperator,
    PhaseConvention,
    PhasePoint,
    beta,
    conjugate,
    dense_matrix,
    format_pauli,
    multiply,
    parse_pauli,
    symplectic_form,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "CliffordGate",
    "DimensionError",
    "PauliOperator",
    "PhaseConvention",
    "PhasePoint",
    "ValidationError",
    "beta",
    "conjugate",
    "dense_matrix",
    "format_pauli",
    "multiply",
    "parse_pauli",
    "symplectic_form",
]
