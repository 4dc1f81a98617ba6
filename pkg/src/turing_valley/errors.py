"""Exception types shared across the solvers."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class PreconditionError(RuntimeError):
    """A solver was called on an economy it does not cover."""


class AbundanceError(PreconditionError):
    """Machines are not abundant; use the general solver instead."""


class NonDifferentiableError(ValueError):
    """Labor income has no derivative at the requested machine knowledge."""
