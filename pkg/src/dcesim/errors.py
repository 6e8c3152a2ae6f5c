"""Exception hierarchy and warnings.

Two error families matter to callers: ``ValidationError`` for bad input
(parameters, sweep specs, file paths) and ``NumericalError`` for solver
failures on input that looked fine.  The CLI maps them to exit codes 2
and 3 respectively.
"""


class DceSimError(Exception):
    """Base class for everything raised on purpose by this package."""


class ValidationError(DceSimError):
    """Input rejected before any numerics ran."""


class ParametricThreshold(ValidationError):
    """Two-photon drive at or beyond the instability threshold |E| >= delta_s."""


class NonPositiveRate(ValidationError):
    """A decay rate or frequency that must be positive is not."""


class UnknownParameter(ValidationError):
    """A sweep axis or override names no known parameter."""


class UnknownFigureTag(ValidationError):
    """Figure tag not in the built-in catalogue."""


class OutputUnwritable(ValidationError):
    """Requested output path cannot be created or written."""


class NumericalError(DceSimError):
    """A solver failed or produced something unphysical."""


class SingularDenominator(NumericalError):
    """Steady-state response denominator vanished."""


class NoConvergence(NumericalError):
    """Time relaxation did not settle within the step budget."""


class EigenFailure(NumericalError):
    """Eigenvalue computation did not converge."""


class UnstableDrift(NumericalError):
    """Covariance requested for a linearly unstable working point."""


class SingularSystem(NumericalError):
    """Steady-state covariance system singular or residual too large."""


class UnphysicalCovariance(NumericalError):
    """Covariance violates positivity or the Heisenberg bound."""


class SingularCovariance(NumericalError):
    """Covariance block too close to singular to evaluate a Wigner function."""


class SingularAtFrequency(NumericalError):
    """Frequency-response matrix ill conditioned at a requested frequency."""


class TailTruncationWarning(UserWarning):
    """Spectral integration window may be cutting off significant tails."""
