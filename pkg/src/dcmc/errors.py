"""Exception hierarchy shared by the library and the CLI."""


class DcmcError(Exception):
    """Base class for all library errors."""


class ValidationError(DcmcError, ValueError):
    """Bad input: domain violations, malformed config, broken preconditions."""


class IncompatibleLoopsError(ValidationError):
    """Loops sampled on different circles cannot be combined."""


class SingularLoopError(DcmcError, ArithmeticError):
    """A loop (or its constant term) is numerically non-invertible."""


class NumericalError(DcmcError, ArithmeticError):
    """A numerical procedure failed (CLI exit code 2)."""


class ConvergenceError(NumericalError):
    """An iteration did not reach its tolerance.

    The last residual is kept on the exception so callers can report it.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class WindowOverflowError(NumericalError):
    """Lattice index outside the range where the truncation is trusted."""


class StructureViolationError(NumericalError):
    """A frame does not have the Lax form of an extended frame."""


class ContourError(NumericalError):
    """Contour integration could not be set up or resolved."""


class TrustAnnulusWarning(UserWarning):
    """A loop was evaluated outside the annulus where its series converges."""


class IndeterminatePhaseError(NumericalError):
    """The phase of a candidate symmetry cannot be estimated (alpha, beta vanish)."""
