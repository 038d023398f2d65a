"""Exception types shared by the modules."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is valid."""


class StabilityError(ValueError):
    """A time step violates the stability (CFL) bound of an explicit scheme."""


class ConvergenceError(RuntimeError):
    """An iterative solve or quadrature did not converge.

    ``history`` carries the residual / refinement sequence for diagnosis.
    """

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)
