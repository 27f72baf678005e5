"""
Double forms on an n-dimensional Euclidean space.

A (p, q)-double form is a bilinear map Lambda^p V x Lambda^q V -> R. It is
stored as a dense C(n, p) x C(n, q) coefficient array omega(e_I, e_J) over the
lexicographic multi-index bases of gbcurv.multiindex. All algebra happens in
an orthonormal frame, so the metric g is the identity bilinear form.

Two scalar modes are supported. FLOAT stores float64 arrays. EXACT stores
object arrays of fractions.Fraction, so identities on rational inputs hold
with zero deviation. The mode is chosen when a TensorContext builds the
forms; every operation preserves it.

Operations:
- exterior_product: shuffle-sign product (Kulkarni-Nomizu on bilinear forms)
- power: k-fold exterior power
- contraction / contract: trace over one (or several) paired slots
- mult_by_metric: g * omega, dual to the contraction through the star
- hodge_star: generalized star, sign (-1)^{(p+q)(n-p-q)}
- inner_product: defined as *(omega . *theta)
- transpose
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial

import numpy as np

from gbcurv.config import TOLERANCES, ScalarMode
from gbcurv.errors import (
    BidegreeMismatchError,
    ContractionError,
    DegreeError,
    DegreeOverflowError,
    DimensionMismatchError,
)
from gbcurv.multiindex import (
    complement_table,
    contraction_table,
    index_position,
    split_table,
)

_to_fraction = np.frompyfunc(Fraction, 1, 1)


def _as_coeffs(values, exact: bool) -> np.ndarray:
    array = np.asarray(values)
    if array.ndim != 2:
        array = array.reshape(1, 1) if array.ndim == 0 else np.atleast_2d(array)
    if exact:
        return _to_fraction(array.astype(object)).astype(object)
    if array.dtype == object:
        return np.vectorize(float, otypes=[np.float64])(array)
    return array.astype(np.float64)


def coerce_factor(factor, exact: bool):
    """Convert a scalar factor to the arithmetic of the given mode."""
    if exact:
        return factor if isinstance(factor, Fraction) else Fraction(factor)
    return float(factor)


def inverse_factorial(m: int, exact: bool):
    """1/m! in the arithmetic of the given mode."""
    return coerce_factor(Fraction(1, factorial(m)), exact)


@dataclass(frozen=True, eq=False)
class DoubleForm:
    """Dense (p, q)-double form on an n-space in an orthonormal frame."""

    n: int
    p: int
    q: int
    coeffs: np.ndarray
    symmetric: bool = False

    def __post_init__(self):
        if self.n < 0:
            raise DegreeError(f"Dimension must be non-negative, got {self.n}")
        for name, degree in (("p", self.p), ("q", self.q)):
            if degree < 0 or degree > self.n:
                raise DegreeError(
                    f"Degree {name}={degree} out of range [0, {self.n}]"
                )

        exact = np.asarray(self.coeffs).dtype == object
        coeffs = _as_coeffs(self.coeffs, exact)
        expected = (comb(self.n, self.p), comb(self.n, self.q))
        if coeffs.shape != expected:
            raise DimensionMismatchError(
                f"Coefficient array of shape {coeffs.shape} does not match "
                f"bidegree ({self.p},{self.q}) on n={self.n}; expected {expected}"
            )
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

        if self.symmetric:
            if self.p != self.q:
                raise ValueError("Only (p,p)-double forms can be symmetric")
            if not _is_symmetric(coeffs, exact):
                raise ValueError("Coefficients are not symmetric within tolerance")

    # --- metadata ---------------------------------------------------------

    @property
    def exact(self) -> bool:
        return self.coeffs.dtype == object

    @property
    def mode(self) -> ScalarMode:
        return ScalarMode.EXACT if self.exact else ScalarMode.FLOAT

    @property
    def bidegree(self) -> tuple[int, int]:
        return (self.p, self.q)

    @property
    def is_scalar(self) -> bool:
        return self.p == 0 and self.q == 0

    @property
    def value(self):
        """Value of a (0,0)-double form."""
        if not self.is_scalar:
            raise BidegreeMismatchError(
                f"Only (0,0)-forms have a scalar value, got ({self.p},{self.q})"
            )
        return self.coeffs[0, 0]

    def evaluate(self, left, right):
        """Coefficient omega(e_I, e_J) for multi-indices I, J."""
        return self.coeffs[index_position(left), index_position(right)]

    def as_matrix(self) -> np.ndarray:
        """Writable float64 copy of the coefficients."""
        return _as_coeffs(self.coeffs, exact=False).copy()

    # --- arithmetic -------------------------------------------------------

    def _check_same_space(self, other: "DoubleForm") -> None:
        if self.n != other.n:
            raise DimensionMismatchError(
                f"Double forms live on n={self.n} and n={other.n}"
            )

    def _aligned(self, other: "DoubleForm") -> tuple[np.ndarray, np.ndarray, bool]:
        self._check_same_space(other)
        exact = self.exact and other.exact
        return _as_coeffs(self.coeffs, exact), _as_coeffs(other.coeffs, exact), exact

    def scale(self, factor) -> "DoubleForm":
        factor = coerce_factor(factor, self.exact)
        return DoubleForm(
            self.n, self.p, self.q, self.coeffs * factor, symmetric=self.symmetric
        )

    def __add__(self, other: "DoubleForm") -> "DoubleForm":
        if not isinstance(other, DoubleForm):
            return NotImplemented
        if self.bidegree != other.bidegree:
            raise BidegreeMismatchError(
                f"Cannot add ({self.p},{self.q}) and ({other.p},{other.q}) forms"
            )
        a, b, _ = self._aligned(other)
        return DoubleForm(
            self.n, self.p, self.q, a + b, self.symmetric and other.symmetric
        )

    def __neg__(self) -> "DoubleForm":
        return self.scale(-1)

    def __sub__(self, other: "DoubleForm") -> "DoubleForm":
        if not isinstance(other, DoubleForm):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, DoubleForm):
            return exterior_product(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, divisor):
        if self.exact:
            return self.scale(Fraction(1) / Fraction(divisor))
        return self.scale(1.0 / float(divisor))

    # --- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        """JSON-ready dict; exact coefficients are written as "num/den" strings."""
        if self.exact:
            coeffs = [[str(x) for x in row] for row in self.coeffs]
        else:
            coeffs = [[float(x) for x in row] for row in self.coeffs]
        return {"n": self.n, "p": self.p, "q": self.q, "coeffs": coeffs}

    @classmethod
    def from_dict(cls, data: dict) -> "DoubleForm":
        try:
            rows = data["coeffs"]
            exact = any(isinstance(x, str) for row in rows for x in row)
            values = (
                np.array([[Fraction(x) for x in row] for row in rows], dtype=object)
                if exact
                else np.array(rows, dtype=np.float64)
            )
            return cls(int(data["n"]), int(data["p"]), int(data["q"]), values)
        except KeyError as e:
            raise ValueError(f"Double form JSON is missing key {e}") from e


@dataclass(frozen=True, eq=False)
class SymBilinearForm(DoubleForm):
    """Symmetric (1,1)-double form; construction symmetrizes exactly."""

    symmetric: bool = field(default=True)

    def __post_init__(self):
        if self.p != 1 or self.q != 1:
            raise BidegreeMismatchError(
                f"A bilinear form has bidegree (1,1), got ({self.p},{self.q})"
            )
        exact = np.asarray(self.coeffs).dtype == object
        coeffs = _as_coeffs(self.coeffs, exact)
        half = Fraction(1, 2) if exact else 0.5
        object.__setattr__(self, "coeffs", (coeffs + coeffs.T) * half)
        object.__setattr__(self, "symmetric", True)
        super().__post_init__()

    @classmethod
    def from_matrix(cls, matrix, mode: ScalarMode = ScalarMode.FLOAT):
        matrix = np.asarray(matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatchError(
                f"Bilinear form needs a square matrix, got shape {matrix.shape}"
            )
        coeffs = _as_coeffs(matrix, mode == ScalarMode.EXACT)
        return cls(matrix.shape[0], 1, 1, coeffs)

    @classmethod
    def from_form(cls, form: DoubleForm) -> "SymBilinearForm":
        return cls(form.n, form.p, form.q, form.coeffs)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.as_matrix())


def _is_symmetric(coeffs: np.ndarray, exact: bool) -> bool:
    if exact:
        return bool(np.all(coeffs == coeffs.T))
    scale = max(1.0, float(np.max(np.abs(coeffs)))) if coeffs.size else 1.0
    return bool(np.all(np.abs(coeffs - coeffs.T) <= TOLERANCES["algebra"] * scale))


# ============================================================================
# Constructors
# ============================================================================


def unit(n: int, mode: ScalarMode = ScalarMode.FLOAT) -> DoubleForm:
    """The scalar 1 as a (0,0)-double form."""
    if mode == ScalarMode.EXACT:
        coeffs = np.array([[Fraction(1)]], dtype=object)
    else:
        coeffs = np.ones((1, 1))
    return DoubleForm(n, 0, 0, coeffs, symmetric=True)


def scalar(n: int, value, mode: ScalarMode = ScalarMode.FLOAT) -> DoubleForm:
    return unit(n, mode).scale(value)


def zero(n: int, p: int, q: int, mode: ScalarMode = ScalarMode.FLOAT) -> DoubleForm:
    shape = (comb(n, p), comb(n, q))
    if mode == ScalarMode.EXACT:
        coeffs = np.full(shape, Fraction(0), dtype=object)
    else:
        coeffs = np.zeros(shape)
    return DoubleForm(n, p, q, coeffs, symmetric=p == q)


def metric(n: int, mode: ScalarMode = ScalarMode.FLOAT) -> SymBilinearForm:
    """The metric g, the identity bilinear form of an orthonormal frame."""
    return SymBilinearForm.from_matrix(np.eye(n, dtype=np.int64), mode)


@dataclass(frozen=True)
class TensorContext:
    """Dimension and scalar mode shared by a family of double forms."""

    n: int
    mode: ScalarMode = ScalarMode.FLOAT

    @property
    def exact(self) -> bool:
        return self.mode == ScalarMode.EXACT

    def metric(self) -> SymBilinearForm:
        return metric(self.n, self.mode)

    def unit(self) -> DoubleForm:
        return unit(self.n, self.mode)

    def scalar(self, value) -> DoubleForm:
        return scalar(self.n, value, self.mode)

    def zero(self, p: int, q: int) -> DoubleForm:
        return zero(self.n, p, q, self.mode)

    def form(self, coeffs, p: int, q: int) -> DoubleForm:
        return DoubleForm(self.n, p, q, _as_coeffs(coeffs, self.exact))

    def bilinear(self, matrix) -> SymBilinearForm:
        return SymBilinearForm.from_matrix(matrix, self.mode)

    def random_matrix(self, rng: np.random.Generator, rows: int, cols: int):
        """Random entries in [-1, 1]; small-denominator rationals in exact mode."""
        if self.exact:
            numerators = rng.integers(-6, 7, size=(rows, cols))
            denominators = rng.integers(1, 7, size=(rows, cols))
            return np.array(
                [
                    [Fraction(int(a), int(b) * 6) for a, b in zip(nrow, drow)]
                    for nrow, drow in zip(numerators, denominators)
                ],
                dtype=object,
            ).reshape(rows, cols)
        return rng.uniform(-1.0, 1.0, size=(rows, cols))

    def random_symmetric(self, rng: np.random.Generator) -> SymBilinearForm:
        return self.bilinear(self.random_matrix(rng, self.n, self.n))

    def random_form(self, rng: np.random.Generator, p: int, q: int) -> DoubleForm:
        return self.form(self.random_matrix(rng, comb(self.n, p), comb(self.n, q)), p, q)

    def random_bianchi(
        self, rng: np.random.Generator, degree: int, terms: int = 2
    ) -> DoubleForm:
        """
        Random symmetric (degree, degree)-form satisfying the first Bianchi identity.

        Built as a sum of products of random symmetric bilinear forms.
        """
        total = self.zero(degree, degree)
        for _ in range(terms):
            product = self.unit()
            for _ in range(degree):
                product = exterior_product(product, self.random_symmetric(rng))
            total = total + product
        return total


# ============================================================================
# Algebra
# ============================================================================


def exterior_product(omega: DoubleForm, theta: DoubleForm) -> DoubleForm:
    """
    Exterior product of a (p,q)- and an (r,s)-double form.

    (omega.theta)(e_K, e_L) is the double shuffle sum over splittings of K
    into (I, I') and of L into (J, J') of
    sign(I,I') sign(J,J') omega(e_I, e_J) theta(e_I', e_J').

    Raises:
        DegreeOverflowError: If p+r > n or q+s > n
        DimensionMismatchError: If the forms live on different n
    """
    a, b, exact = omega._aligned(theta)
    n = omega.n
    p, q, r, s = omega.p, omega.q, theta.p, theta.q
    if p + r > n or q + s > n:
        raise DegreeOverflowError(
            f"Product of ({p},{q}) and ({r},{s}) forms exceeds dimension {n}"
        )
    symmetric = omega.symmetric and theta.symmetric

    if omega.is_scalar:
        return DoubleForm(n, r, s, b * a[0, 0], symmetric)
    if theta.is_scalar:
        return DoubleForm(n, p, q, a * b[0, 0], symmetric)

    left_k, right_k, sign_k = split_table(n, p, r)
    left_l, right_l, sign_l = split_table(n, q, s)

    rows_a = left_k[:, :, None, None]
    rows_b = right_k[:, :, None, None]
    cols_a = left_l[None, None, :, :]
    cols_b = right_l[None, None, :, :]
    weights = sign_k[:, :, None, None] * sign_l[None, None, :, :]

    terms = a[rows_a, cols_a] * b[rows_b, cols_b] * weights
    coeffs = terms.sum(axis=(1, 3))
    return DoubleForm(n, p + r, q + s, _as_coeffs(coeffs, exact), symmetric)


def power(form: DoubleForm, k: int) -> DoubleForm:
    """
    k-fold exterior power; power(B, 0) is the scalar 1.

    Raises:
        DegreeError: If k is negative
        DegreeOverflowError: If the power exceeds the dimension
    """
    if k < 0:
        raise DegreeError(f"Power must be non-negative, got {k}")
    if k * max(form.p, form.q) > form.n:
        raise DegreeOverflowError(
            f"Power {k} of a ({form.p},{form.q}) form exceeds dimension {form.n}"
        )
    result = unit(form.n, form.mode)
    for _ in range(k):
        result = exterior_product(result, form)
    return result


def contraction(omega: DoubleForm) -> DoubleForm:
    """
    Contraction c: (p,q) -> (p-1,q-1).

    (c omega)(x, y) = sum_i omega(e_i ^ x, e_i ^ y) in the orthonormal frame;
    c is the adjoint of multiplication by g.

    Raises:
        ContractionError: If p = 0 or q = 0
    """
    if omega.p == 0 or omega.q == 0:
        raise ContractionError(
            f"Cannot contract a ({omega.p},{omega.q})-double form"
        )
    target_p, sign_p = contraction_table(omega.n, omega.p)
    target_q, sign_q = contraction_table(omega.n, omega.q)

    gathered = omega.coeffs[target_p[:, None, :], target_q[None, :, :]]
    weights = sign_p[:, None, :] * sign_q[None, :, :]
    coeffs = (gathered * weights).sum(axis=2)
    return DoubleForm(
        omega.n,
        omega.p - 1,
        omega.q - 1,
        _as_coeffs(coeffs, omega.exact),
        omega.symmetric,
    )


def contract(omega: DoubleForm, times: int) -> DoubleForm:
    """Apply the contraction map ``times`` times (c^times omega)."""
    if times < 0:
        raise DegreeError(f"Contraction count must be non-negative, got {times}")
    result = omega
    for _ in range(times):
        result = contraction(result)
    return result


def mult_by_metric(omega: DoubleForm) -> DoubleForm:
    """g.omega; equals duality_sign(n, p, q) *c*omega."""
    return exterior_product(metric(omega.n, omega.mode), omega)


def star_sign(n: int, p: int, q: int) -> int:
    """(-1)^{(p+q)(n-p-q)}."""
    return -1 if ((p + q) * (n - p - q)) % 2 else 1


def duality_sign(n: int, p: int, q: int) -> int:
    """
    Sign in g omega = s *c*omega and c omega = s *g*omega for a (p,q)-form.

    s = (-1)^{n(p+q)}: +1 in even dimension and on (p,p)-forms, -1 when
    both n and p+q are odd.
    """
    return -1 if (n * (p + q)) % 2 else 1


def hodge_star(omega: DoubleForm) -> DoubleForm:
    """
    Generalized Hodge star: (p,q) -> (n-p, n-q).

    (*omega)(e_I, e_J) = (-1)^{(p+q)(n-p-q)} omega(*e_I, *e_J), with the
    classical star *e_I = sign(I, I^c) e_{I^c}. The result does not depend
    on the orientation, and ** omega = (-1)^{(p+q)(n-p-q)} omega.
    """
    n, p, q = omega.n, omega.p, omega.q
    rows, row_signs = complement_table(n, n - p)
    cols, col_signs = complement_table(n, n - q)
    signs = star_sign(n, p, q) * row_signs[:, None] * col_signs[None, :]
    coeffs = omega.coeffs[rows[:, None], cols[None, :]] * signs
    return DoubleForm(n, n - p, n - q, _as_coeffs(coeffs, omega.exact), omega.symmetric)


def inner_product(omega: DoubleForm, theta: DoubleForm):
    """
    Inner product <omega, theta> = *(omega . *theta).

    Raises:
        BidegreeMismatchError: If the forms have different bidegrees
    """
    omega._check_same_space(theta)
    if omega.bidegree != theta.bidegree:
        raise BidegreeMismatchError(
            f"Inner product of ({omega.p},{omega.q}) and "
            f"({theta.p},{theta.q}) forms"
        )
    return hodge_star(exterior_product(omega, hodge_star(theta))).value


def component_inner_product(omega: DoubleForm, theta: DoubleForm):
    """Sum of omega(e_I, e_J) theta(e_I, e_J) over the bases."""
    if omega.bidegree != theta.bidegree:
        raise BidegreeMismatchError(
            f"Inner product of ({omega.p},{omega.q}) and "
            f"({theta.p},{theta.q}) forms"
        )
    a, b, _ = omega._aligned(theta)
    return (a * b).sum()


def transpose(omega: DoubleForm) -> DoubleForm:
    """(omega^T)(a, b) = omega(b, a)."""
    return DoubleForm(omega.n, omega.q, omega.p, omega.coeffs.T, omega.symmetric)


# ============================================================================
# Comparison helpers
# ============================================================================


def scalar_deviation(x, y) -> float:
    """|x - y| relative to max(1, |x|, |y|); exactly 0.0 for equal fractions."""
    difference = abs(x - y)
    if difference == 0:
        return 0.0
    return float(difference) / max(1.0, float(abs(x)), float(abs(y)))


def deviation(omega: DoubleForm, theta: DoubleForm) -> float:
    """Largest coefficient difference relative to max(1, largest coefficient)."""
    if omega.bidegree != theta.bidegree:
        raise BidegreeMismatchError(
            f"Cannot compare ({omega.p},{omega.q}) and ({theta.p},{theta.q}) forms"
        )
    a, b, exact = omega._aligned(theta)
    if a.size == 0:
        return 0.0
    difference = np.abs(a - b).max()
    if exact and difference == 0:
        return 0.0
    scale = max(1.0, float(np.abs(a).max()), float(np.abs(b).max()))
    return float(difference) / scale
