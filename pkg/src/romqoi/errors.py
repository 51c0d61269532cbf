"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    """Bad shapes, sizes or parameter ranges."""


class DegenerateInputError(InvalidArgumentError):
    """Input carries no usable information (e.g. an all-zero snapshot matrix)."""


class LinearSolveError(ArithmeticError):
    """A linear system could not be solved (singular or non-finite matrix)."""


class ConvergenceError(RuntimeError):
    """Newton iteration did not reach the residual tolerance.

    Attributes
    ----------
    residual_norm : float
        Euclidean norm of the residual at the last iterate.
    iterations : int
        Number of Newton updates performed.
    step_index : int or None
        Time index of the failing step when raised from a time integrator.
    """

    def __init__(self, message, residual_norm, iterations, step_index=None):
        super().__init__(message)
        self.residual_norm = residual_norm
        self.iterations = iterations
        self.step_index = step_index

    def __str__(self):
        msg = super().__str__()
        if self.step_index is not None:
            msg = f"step {self.step_index}: {msg}"
        return msg


class SelectionError(ArithmeticError):
    """Greedy DEIM index selection hit a singular interpolation matrix."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConfigError(InvalidArgumentError):
    """Invalid experiment configuration."""


class MissingArtifactError(FileNotFoundError):
    """An input file produced by an earlier pipeline stage is absent."""
