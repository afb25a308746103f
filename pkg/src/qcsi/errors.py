"""Exception types shared across the package.

The CLI maps these onto exit codes: validation errors to 2, capacity errors
to 3 and infeasibility to 4.
"""


class ValidationError(ValueError):
    """Input is malformed or violates a documented precondition."""


class DimensionError(ValidationError):
    """Operands live on different numbers of qubits."""


class CapacityError(RuntimeError):
    """A dense or exhaustive computation was requested beyond its size limit."""


class SchemeViolationError(ValidationError):
    """An operation outside the free sector of the scheme was requested."""


class ImpossibleOutcomeError(ValidationError):
    """A measurement branch of probability zero was requested."""


class InfeasibleError(RuntimeError):
    """A requested hidden-variable representation does not exist."""


class SolverError(RuntimeError):
    """The numerical feasibility solver failed to reach a trustworthy decision."""
