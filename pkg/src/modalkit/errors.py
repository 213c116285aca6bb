"""Exception hierarchy shared by every modalkit module."""


class ModalKitError(Exception):
    """Base class for all errors raised by modalkit."""


class DomainError(ModalKitError, ValueError):
    """Argument outside the domain of a function (non-finite input, pole, cap exceeded)."""


class ShapeError(ModalKitError, ValueError):
    """Array dimensions disagree with the kernel or sample dimension."""


class InvalidOrderError(DomainError):
    """Kernel order is not a supported even integer."""


class NumericError(ModalKitError, ArithmeticError):
    """A numerical procedure failed (ill-conditioned system, divergent integral)."""


class MomentConditionError(ModalKitError, ValueError):
    """A user-supplied kernel violates the moment conditions of its declared order."""


class DegenerateKernelError(ModalKitError, ValueError):
    """The leading moment of the kernel vanishes, so the criterion is undefined."""


class InadmissibleKernelError(ModalKitError, ValueError):
    """Kernel violates the relaxed moment condition of the singular-Hessian criterion."""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class DegenerateBiasError(ModalKitError, ValueError):
    """The leading asymptotic bias vanishes; the optimal bandwidth diverges."""


class SearchFailureError(ModalKitError, RuntimeError):
    """No start of a multi-start search converged to an admissible stationary point."""


class TopologyError(ModalKitError, RuntimeError):
    """The estimated density does not have the modal structure the task requires."""


class DesignError(ModalKitError, ValueError):
    """Regression design matrix is rank deficient."""


class UndefinedTestError(ModalKitError, ValueError):
    """A statistical test is undefined for the supplied samples."""
