"""Exception hierarchy.  The CLI maps these to exit codes."""


class JacEdgeError(Exception):
    """Base class for all package errors."""


class ConfigError(JacEdgeError, ValueError):
    """Bad user configuration (grid syntax, missing options, bad JSON)."""


class ModelValidityError(JacEdgeError, ValueError):
    """A coefficient model violates a structural requirement.

    Parameters
    ----------
    message : str
    n : int, optional
        First offending index, when there is one.
    """

    def __init__(self, message, n=None):
        super().__init__(message)
        self.n = n


class UnsupportedModelError(JacEdgeError, ValueError):
    """The operation is undefined for this model (e.g. eventually constant)."""


class DomainError(JacEdgeError, ValueError):
    """An argument lies outside the mathematical domain of the function."""


class NoTurningPointError(DomainError):
    """The energy is below the threshold of the hyperbolic region."""


class RegimeError(JacEdgeError, ValueError):
    """Parameters fall outside the regime where an expansion applies."""


class DivergenceError(JacEdgeError, ValueError):
    """An integral or series diverges for the requested parameters."""


class PreconditionError(JacEdgeError, ValueError):
    """A checked precondition of a certificate fails."""


class DegenerateSolutionError(JacEdgeError, ArithmeticError):
    """A recursion hit the zero solution."""


class NumericResolutionError(JacEdgeError, ArithmeticError):
    """The computation could not be resolved to the requested tolerance."""


class PoleProximityError(NumericResolutionError):
    """The Weyl-function recursion came too close to a pole."""


class GenerationError(JacEdgeError, ArithmeticError):
    """Generated series coefficients failed pointwise validation."""
