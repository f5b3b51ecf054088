"""Exception types shared across the package."""


class PkcError(Exception):
    """Base class for all package errors."""


class DomainError(PkcError, ValueError):
    """An argument is outside its mathematical domain."""


class ShapeError(PkcError, ValueError):
    """Mismatched dimensions or control-point counts."""


class DegenerateSpeedError(PkcError, ValueError):
    """Curve speed fell below the degeneracy threshold.

    Attributes:
        t: parameter at which the speed was degenerate.
    """

    def __init__(self, t, message=None):
        self.t = t
        super().__init__(message or f"degenerate speed at t={t}")


class DegenerateInputError(PkcError, ValueError):
    """Input geometry is degenerate (coincident points, zero chords)."""


class InfeasibleError(PkcError, RuntimeError):
    """The constraint system could not be satisfied.

    Attributes:
        worst_residual: largest constraint violation at the failure point.
    """

    def __init__(self, worst_residual, message=None):
        self.worst_residual = worst_residual
        super().__init__(message or f"infeasible constraints, worst residual {worst_residual:g}")


class NumericalError(PkcError, RuntimeError):
    """A non-finite value appeared during optimization.

    Attributes:
        index: offending unknown index, or None.
    """

    def __init__(self, index=None, message=None):
        self.index = index
        super().__init__(message or f"non-finite value (unknown index {index})")
