"""
Exception types raised by gbcurv.

Every error subclasses a builtin exception so callers can catch broadly
(``except ValueError``) or precisely.
"""


class DegreeError(ValueError):
    """A degree lies outside [0, n]."""


class DegreeOverflowError(DegreeError):
    """A product or power would exceed the ambient dimension."""


class ContractionError(ValueError):
    """Contraction of a double form with a zero degree."""


class BidegreeMismatchError(ValueError):
    """Two double forms of different bidegree were combined."""


class DimensionMismatchError(ValueError):
    """Objects living on different dimensions were combined."""


class DegenerateImmersionError(ValueError):
    """The chart Jacobian loses rank at a parameter point."""

    def __init__(self, point, gram_determinant: float):
        self.point = tuple(float(x) for x in point)
        self.gram_determinant = float(gram_determinant)
        super().__init__(
            f"Degenerate immersion at u={self.point} "
            f"(normalized Gram determinant {self.gram_determinant:.3e})"
        )


class InvalidVariationError(ValueError):
    """A variation field is not admissible for the first-variation check."""


class OffSphereError(ValueError):
    """A sample of a sphere immersion does not lie on the unit sphere."""


class RouteMismatchError(RuntimeError):
    """Two independent formulas for the same invariant disagree."""


class CatalogError(KeyError):
    """Unknown built-in immersion or parameter."""


class ImmersionFileError(ValueError):
    """Malformed immersion JSON file."""
