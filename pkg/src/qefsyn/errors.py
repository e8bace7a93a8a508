"""Exception hierarchy shared across the package."""


class QefsynError(Exception):
    """Base class for all package errors."""


class ValidationError(QefsynError):
    """A structural or physical-realizability invariant is violated."""


class InadmissibleError(QefsynError):
    """The controller fails a spectral admissibility condition."""


class NumericalError(QefsynError):
    """A numerical routine failed to reach its accuracy contract."""
