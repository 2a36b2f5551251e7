"""Exception types shared across the package.

Error classes mirror the failure modes of the numerical surface: linear
algebra preconditions, gamma-function poles, admissibility guards of the
integral transforms, and Monte Carlo sampling faults.
"""

from __future__ import annotations


class StiefelXformError(Exception):
    """Base class for all package errors."""


class NotPositiveDefinite(StiefelXformError):
    """A matrix expected to be symmetric positive definite is not."""


class RankDeficient(StiefelXformError):
    """A matrix expected to have full column rank does not."""


class DimensionError(StiefelXformError):
    """Incompatible shapes or inadmissible manifold dimensions."""


class OutOfRegion(StiefelXformError):
    """A coordinate block lies outside its admissible matrix region."""


class PoleError(StiefelXformError):
    """A gamma factor was evaluated at (or within tolerance of) a pole.

    ``factor`` is the zero-based index of the offending factor when known.
    """

    def __init__(self, message: str, factor: int | None = None):
        super().__init__(message)
        self.factor = factor


class DomainError(StiefelXformError):
    """Argument outside the real domain of a special function."""


class AdmissibilityError(StiefelXformError):
    """A stated hypothesis of a transform or identity is violated.

    ``guard`` names the violated condition, e.g. ``"k <= n-m"``.
    """

    def __init__(self, message: str, guard: str | None = None):
        super().__init__(message)
        self.guard = guard


class NonFiniteSample(StiefelXformError):
    """An integrand returned NaN or infinity for some sample.

    Fatal per estimate: singular kernels must be excluded by admissibility
    guards rather than silently clipped.  ``index`` is the global sample
    index of the first offending draw.
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class UnknownIdentity(StiefelXformError):
    """No identity fixture registered under the requested id."""


class DegenerateFit(StiefelXformError):
    """Constant fitting is impossible because all reference estimates vanish."""
