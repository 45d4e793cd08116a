"""Error types shared across the package.

NumericalError marks failures of numerical procedures on valid inputs, as
opposed to ValueError for malformed arguments; the CLI maps the former to
exit code 2.
"""


class NumericalError(RuntimeError):
    """A numerical procedure failed on structurally valid input."""


class DefinitenessError(NumericalError):
    """A matrix or spectrum that must be positive (semi)definite is not."""


class StabilityError(NumericalError):
    """A filter denominator has roots on or outside the unit circle."""


class InfeasiblePointError(NumericalError):
    """Objective evaluated where a trigonometric polynomial is nonpositive."""


class FactorizationError(NumericalError):
    """Spectral factorization failed or left a residual above tolerance."""


class SeparabilityError(FactorizationError):
    """A coefficient array required to be rank one (separable) is not."""
