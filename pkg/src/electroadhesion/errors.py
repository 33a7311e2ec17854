"""Exception types raised across the toolkit."""


class ElectroadhesionError(Exception):
    """Base class for all toolkit errors."""


class DomainError(ElectroadhesionError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RangeError(DomainError):
    """A frequency falls outside a tabulated range and extrapolation is off."""


class DegenerateStackError(ElectroadhesionError, ValueError):
    """A layer stack makes a coefficient denominator vanish."""


class SingularSystemError(ElectroadhesionError, ValueError):
    """A linear system has no unique solution."""


class ConvergenceError(ElectroadhesionError, RuntimeError):
    """A numerical procedure failed to converge.

    Parameters
    ----------
    message : str
        Human-readable description.
    diagnostics : dict, optional
        Solver state at failure (iterate history, last residual, grid sizes).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ParseError(ElectroadhesionError, ValueError):
    """A data or config file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


class ValidationError(ElectroadhesionError, ValueError):
    """Parsed data violates an invariant (ordering, positivity, alignment)."""


class AlignmentError(ValidationError):
    """Impedance sweeps share no common frequency range."""


class FitInfeasibleError(ElectroadhesionError, ValueError):
    """Too few records to fit a model."""


class IllPosedError(ElectroadhesionError, ValueError):
    """A least-squares system is rank deficient."""


class ConfigError(ElectroadhesionError, ValueError):
    """A run configuration is invalid."""
