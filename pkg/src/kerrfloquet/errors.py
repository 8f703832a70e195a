"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: validation problems exit 1, numerical
non-convergence exits 2.
"""


class ValidationError(ValueError):
    """Invalid parameters or inputs."""


class ConvergenceError(RuntimeError):
    """A numerical procedure failed to converge.

    ``where`` carries the failing time, grid index, or other location when one
    is known.
    """

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class TruncationError(ConvergenceError):
    """The requested Fock cutoff is too small for the operation."""


class SweepError(ConvergenceError):
    """A parameter sweep aborted; ``partial`` holds the points finished so far."""

    def __init__(self, message, index, partial):
        super().__init__(message, where=index)
        self.index = index
        self.partial = partial


class DegenerateSteadyStateError(ConvergenceError):
    """The Liouvillian has more than one stationary state."""

    def __init__(self, message, basis):
        super().__init__(message)
        self.basis = basis
