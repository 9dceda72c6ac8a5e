"""Exception hierarchy.

Numerical failures (blow-up, singular solves) and precondition failures
(degenerate spectra, under-resolved step counts, leaked states) are kept
apart because the command line maps them to different exit codes.
"""


class AdiabaticLabError(Exception):
    """Base class for all errors raised by this package."""


class PreconditionError(AdiabaticLabError, ValueError):
    """An input violates a documented precondition."""


class NotHermitianError(PreconditionError):
    pass


class DegenerateSpectrumError(PreconditionError):
    """Spectral gap fell below the degeneracy tolerance.

    ``s`` holds the offending parameter value when known.
    """

    def __init__(self, message, s=None):
        super().__init__(message)
        self.s = s


class GridError(PreconditionError):
    """Grid too coarse, or a requested point is not on the grid."""


class StepControlError(PreconditionError):
    """Too few steps to resolve the kernel oscillation at this T."""


class CyclicityError(PreconditionError):
    """Evolution is not (approximately) cyclic, or the family is not cyclic."""


class FrameMismatchError(PreconditionError):
    """Trajectory tagged with the wrong frame for the requested operation."""


class SingularPathError(PreconditionError):
    """Integration path comes too close to a potential's singular set."""


class NumericalError(AdiabaticLabError, ArithmeticError):
    """Non-finite state, norm drift, or failed linear solve."""
