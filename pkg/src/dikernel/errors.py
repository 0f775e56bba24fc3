"""Exception hierarchy shared by the library, the service, and the CLI."""


class DikernelError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(DikernelError, ValueError):
    """A parameter violates a precondition (e.g. n = 0, eta <= 0)."""


class DomainError(DikernelError, ValueError):
    """A point falls outside the domain an operation is defined on."""


class ShapeError(DikernelError, ValueError):
    """Two objects have incompatible representations (partition/grid mismatch)."""


class ContractError(DikernelError, ValueError):
    """An input breaks an invariant it was supposed to satisfy."""


class BudgetError(DikernelError, ValueError):
    """An exact computation exceeds its enumeration budget."""


class NotApplicableError(DikernelError, ValueError):
    """The operation's applicability condition does not hold (e.g. gamma = 0)."""


class NonConvergenceError(DikernelError, RuntimeError):
    """An iterative solver hit its iteration cap.

    Carries the last iterate so callers can still inspect partial results.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
