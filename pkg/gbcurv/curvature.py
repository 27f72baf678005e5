"""
Pointwise curvature invariants of a Riemann tensor given as a (2,2)-double form.

Gauss-Bonnet curvatures h_2k, Einstein-Lovelock tensors T_2k, the odd
curvatures h_2k+1(N) of a submanifold, and the generalized Laplacian l_2k at
a point. Every invariant with two formulas exposes both:

    h_2k        *(g^{n-2k} R^k)/(n-2k)!          c^{2k} R^k / (2k)!
    T_2k        *(g^{n-2k-1} R^k)/(n-2k-1)!      h_2k g - c^{2k-1} R^k/(2k-1)!
    h_2k+1(N)   *(g^{n-2k-1} R^k B_N)/(n-2k-1)!  <T_2k, B_N>

The public functions use the contraction route. When route checking is on
(GBCURV_CHECK_ROUTES=1, or debug logging) they also evaluate the star route
and raise RouteMismatchError on disagreement.
"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import factorial

import numpy as np

from gbcurv.config import TOLERANCES, ScalarMode, check_routes_enabled
from gbcurv.double_form import (
    DoubleForm,
    SymBilinearForm,
    contract,
    deviation,
    exterior_product,
    hodge_star,
    inner_product,
    inverse_factorial,
    metric,
    power,
    scalar_deviation,
    zero,
)
from gbcurv.errors import (
    BidegreeMismatchError,
    DegreeError,
    DimensionMismatchError,
    RouteMismatchError,
)
from gbcurv.logging_config import get_logger
from gbcurv.multiindex import enumerate_multiindices

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class CurvatureTensor(DoubleForm):
    """Symmetric (2,2)-double form satisfying the first Bianchi identity."""

    symmetric: bool = field(default=True)

    def __post_init__(self):
        if self.p != 2 or self.q != 2:
            raise BidegreeMismatchError(
                f"A curvature tensor has bidegree (2,2), got ({self.p},{self.q})"
            )
        super().__post_init__()

    @classmethod
    def from_form(cls, form: DoubleForm) -> "CurvatureTensor":
        return cls(form.n, form.p, form.q, form.coeffs)


@dataclass(frozen=True, eq=False)
class LovelockTensor(SymBilinearForm):
    """Einstein-Lovelock tensor T_2k; ``order`` is 2k."""

    order: int = 0

    @classmethod
    def of_order(cls, form: DoubleForm, order: int) -> "LovelockTensor":
        return cls(form.n, form.p, form.q, form.coeffs, order=order)


class Definiteness(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    INDEFINITE = "indefinite"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class EvenInvariants:
    """s_0, s_2, ... and t_0, t_2, ... of a hypersurface, computed from R = B^2/2."""

    s: tuple
    t: tuple


def _zero_scalar(exact: bool):
    return Fraction(0) if exact else 0.0


def _check_half_order(R: DoubleForm, k: int) -> None:
    if k < 0 or 2 * k > R.n:
        raise DegreeError(f"Order 2k={2 * k} out of range [0, {R.n}]")


def _as_curvature(R: DoubleForm) -> DoubleForm:
    if R.bidegree != (2, 2):
        raise BidegreeMismatchError(
            f"Expected a (2,2) curvature form, got ({R.p},{R.q})"
        )
    return R


def _checked(name: str, production, reference: Callable[[], object]):
    """Return ``production``; compare it against the reference route if enabled."""
    if not check_routes_enabled():
        return production

    other = reference()
    if isinstance(production, DoubleForm):
        gap = deviation(production, other)
    else:
        gap = scalar_deviation(production, other)
    logger.debug(f"{name}: route deviation {gap:.3e}")
    if gap > TOLERANCES["algebra"]:
        raise RouteMismatchError(
            f"{name}: contraction and star routes differ by {gap:.3e}"
        )
    return production


# ============================================================================
# Gauss equation
# ============================================================================


def gauss_equation(
    Bs: Sequence[SymBilinearForm],
    ambient_curv=0,
    n: int | None = None,
    mode: ScalarMode | None = None,
) -> CurvatureTensor:
    """
    Intrinsic curvature of a submanifold of a space form.

    R = ambient_curv * g^2/2 + (1/2) sum_a B_a^2, summed over an orthonormal
    normal frame.

    Args:
        Bs: Second fundamental forms, one per normal direction
        ambient_curv: Constant sectional curvature of the ambient space
        n: Dimension, required only when Bs is empty
        mode: Scalar mode, defaults to the mode of the first form

    Raises:
        DimensionMismatchError: If the forms live on different dimensions
    """
    if Bs:
        dims = {B.n for B in Bs}
        if len(dims) != 1 or (n is not None and dims != {n}):
            raise DimensionMismatchError(
                f"Second fundamental forms live on dimensions {sorted(dims)}"
            )
        n = Bs[0].n
        mode = mode or Bs[0].mode
    elif n is None:
        raise DimensionMismatchError("Dimension is required when no forms are given")
    mode = mode or ScalarMode.FLOAT
    exact = mode == ScalarMode.EXACT
    half = Fraction(1, 2) if exact else 0.5

    g = metric(n, mode)
    lam = Fraction(ambient_curv) if exact else float(ambient_curv)
    R = exterior_product(g, g).scale(half * lam)
    for B in Bs:
        R = R + exterior_product(B, B).scale(half)
    return CurvatureTensor.from_form(R)


# ============================================================================
# Gauss-Bonnet curvatures h_2k
# ============================================================================


def gauss_bonnet_h_star(R: DoubleForm, k: int):
    """h_2k = *(g^{n-2k} R^k)/(n-2k)!."""
    _as_curvature(R)
    _check_half_order(R, k)
    g = metric(R.n, R.mode)
    top = exterior_product(power(g, R.n - 2 * k), power(R, k))
    return hodge_star(top).value * inverse_factorial(R.n - 2 * k, R.exact)


def gauss_bonnet_h_contracted(R: DoubleForm, k: int):
    """h_2k = c^{2k} R^k / (2k)!."""
    _as_curvature(R)
    _check_half_order(R, k)
    return contract(power(R, k), 2 * k).value * inverse_factorial(2 * k, R.exact)


def gauss_bonnet_h(R: DoubleForm, k: int):
    """
    The (2k)-th Gauss-Bonnet curvature of R.

    h_0 = 1 and h_2 is half the scalar curvature.

    Raises:
        DegreeError: If 2k > n
    """
    return _checked(
        f"h_{2 * k}",
        gauss_bonnet_h_contracted(R, k),
        lambda: gauss_bonnet_h_star(R, k),
    )


def gauss_bonnet_table(R: DoubleForm) -> list:
    """[h_0, h_2, ..., h_{2 floor(n/2)}]."""
    table = [gauss_bonnet_h(R, k) for k in range(R.n // 2 + 1)]
    logger.debug(f"Gauss-Bonnet table on n={R.n}: {table}")
    return table


# ============================================================================
# Einstein-Lovelock tensors T_2k
# ============================================================================


def lovelock_tensor_star(R: DoubleForm, k: int) -> LovelockTensor:
    """T_2k = *(g^{n-2k-1} R^k)/(n-2k-1)!; zero when 2k = n."""
    _as_curvature(R)
    _check_half_order(R, k)
    n = R.n
    if 2 * k == n:
        return LovelockTensor.of_order(zero(n, 1, 1, R.mode), 2 * k)

    g = metric(n, R.mode)
    top = exterior_product(power(g, n - 2 * k - 1), power(R, k))
    form = hodge_star(top).scale(inverse_factorial(n - 2 * k - 1, R.exact))
    return LovelockTensor.of_order(form, 2 * k)


def lovelock_tensor_contracted(R: DoubleForm, k: int) -> LovelockTensor:
    """T_2k = h_2k g - c^{2k-1} R^k/(2k-1)!, with T_0 = g."""
    _as_curvature(R)
    _check_half_order(R, k)
    g = metric(R.n, R.mode)
    if k == 0:
        return LovelockTensor.of_order(g, 0)

    R_k = power(R, k)
    h = contract(R_k, 2 * k).value * inverse_factorial(2 * k, R.exact)
    tail = contract(R_k, 2 * k - 1).scale(inverse_factorial(2 * k - 1, R.exact))
    return LovelockTensor.of_order(g.scale(h) - tail, 2 * k)


def lovelock_tensor(R: DoubleForm, k: int) -> LovelockTensor:
    """
    The (2k)-th Einstein-Lovelock tensor of R.

    T_0 = g and T_n = 0. Its trace is (n-2k) h_2k.

    Raises:
        DegreeError: If 2k > n
    """
    return _checked(
        f"T_{2 * k}",
        lovelock_tensor_contracted(R, k),
        lambda: lovelock_tensor_star(R, k),
    )


# ============================================================================
# Odd Gauss-Bonnet curvatures h_2k+1(N)
# ============================================================================


def _check_pair(R: DoubleForm, B_N: DoubleForm) -> None:
    _as_curvature(R)
    if R.n != B_N.n:
        raise DimensionMismatchError(
            f"Curvature on n={R.n} and second fundamental form on n={B_N.n}"
        )
    if B_N.bidegree != (1, 1):
        raise BidegreeMismatchError(
            f"Expected a (1,1) form, got ({B_N.p},{B_N.q})"
        )


def gauss_bonnet_h_odd_star(R: DoubleForm, B_N: DoubleForm, k: int):
    """h_2k+1(N) = *(g^{n-2k-1} R^k B_N)/(n-2k-1)!; zero when 2k = n."""
    _check_pair(R, B_N)
    _check_half_order(R, k)
    n = R.n
    if 2 * k == n:
        return _zero_scalar(R.exact and B_N.exact)

    g = metric(n, R.mode)
    top = exterior_product(
        exterior_product(power(g, n - 2 * k - 1), power(R, k)), B_N
    )
    return hodge_star(top).value * inverse_factorial(n - 2 * k - 1, R.exact)


def gauss_bonnet_h_odd_pairing(R: DoubleForm, B_N: DoubleForm, k: int):
    """h_2k+1(N) = <T_2k, B_N>, with T_2k from the contraction route."""
    _check_pair(R, B_N)
    _check_half_order(R, k)
    if 2 * k == R.n:
        return _zero_scalar(R.exact and B_N.exact)
    return inner_product(lovelock_tensor_contracted(R, k), B_N)


def gauss_bonnet_h_odd(R: DoubleForm, B_N: DoubleForm, k: int):
    """
    The (2k+1)-th Gauss-Bonnet curvature in the normal direction N.

    h_1(N) is the mean curvature c B_N; the value is linear in B_N and
    vanishes when 2k = n.

    Raises:
        DegreeError: If 2k > n
        DimensionMismatchError: If R and B_N live on different dimensions
    """
    return _checked(
        f"h_{2 * k + 1}",
        gauss_bonnet_h_odd_pairing(R, B_N, k),
        lambda: gauss_bonnet_h_odd_star(R, B_N, k),
    )


# ============================================================================
# Space forms and hypersurfaces
# ============================================================================


def _require_entries(table: Sequence, needed: int, label: str) -> None:
    if len(table) < needed:
        raise DegreeError(f"{label} table has {len(table)} entries, needs {needed}")


def spaceform_h_from_s(s: Sequence, c, n: int, k: int):
    """
    h_2k of a hypersurface in a space form of curvature c.

    h_2k = 1/(2^k (n-2k)!) sum_i k!(n+2i-2k)!(2k-2i)!/(i!(k-i)!) s_{2k-2i} c^i

    Args:
        s: Elementary symmetric functions s_0 .. s_2k of the shape operator
        c: Ambient sectional curvature
        n: Dimension of the hypersurface
        k: Half order

    Raises:
        DegreeError: If 2k > n or the table is too short
    """
    if k < 0 or 2 * k > n:
        raise DegreeError(f"Order 2k={2 * k} out of range [0, {n}]")
    _require_entries(s, 2 * k + 1, "Symmetric function")

    total = 0
    for i in range(k + 1):
        weight = Fraction(
            factorial(k) * factorial(n + 2 * i - 2 * k) * factorial(2 * k - 2 * i),
            factorial(i) * factorial(k - i),
        )
        total += weight * s[2 * k - 2 * i] * c**i
    return total * Fraction(1, 2**k * factorial(n - 2 * k))


def spaceform_s_from_h(h: Sequence, c, n: int, k: int):
    """
    Inverse of spaceform_h_from_s: s_2k from h_0, h_2, ..., h_2k.

    s_2k = k!/((2k)!(n-2k)!) sum_i (-1)^{k-i} 2^i (n-2i)!/(i!(k-i)!) h_2i c^{k-i}

    Args:
        h: Gauss-Bonnet curvatures indexed by half order, h[i] = h_2i
    """
    if k < 0 or 2 * k > n:
        raise DegreeError(f"Order 2k={2 * k} out of range [0, {n}]")
    _require_entries(h, k + 1, "Gauss-Bonnet")

    total = 0
    for i in range(k + 1):
        weight = Fraction(
            (-1) ** (k - i) * 2**i * factorial(n - 2 * i),
            factorial(i) * factorial(k - i),
        )
        total += weight * h[i] * c ** (k - i)
    return total * Fraction(factorial(k), factorial(2 * k) * factorial(n - 2 * k))


def spaceform_h_table(s: Sequence, c, n: int) -> list:
    """[h_0, h_2, ...] from a full symmetric-function table."""
    return [spaceform_h_from_s(s, c, n, k) for k in range(n // 2 + 1)]


def hypersurface_minimality_polynomial(s: Sequence, ambient_curv, n: int, k: int):
    """
    h_2k+1(N) of a hypersurface in a space form, in terms of s_j(B_N).

    sum_i k!(2k-2i+1)!(n-2k-1+2i)! c^i / (i!(k-i)!(n-2k-1)! 2^k) s_{2k-2i+1}

    Raises:
        DegreeError: If 2k >= n
    """
    if k < 0 or 2 * k >= n:
        raise DegreeError(f"Order 2k={2 * k} must satisfy 0 <= 2k < {n}")
    _require_entries(s, 2 * k + 2, "Symmetric function")

    total = 0
    for i in range(k + 1):
        weight = Fraction(
            factorial(k) * factorial(2 * k - 2 * i + 1) * factorial(n - 2 * k - 1 + 2 * i),
            factorial(i) * factorial(k - i) * factorial(n - 2 * k - 1) * 2**k,
        )
        total += weight * s[2 * k - 2 * i + 1] * ambient_curv**i
    return total


def hypersurface_even_invariants(B: SymBilinearForm) -> EvenInvariants:
    """
    Even symmetric functions and Newton transformations of a hypersurface
    of Euclidean space, recovered from its intrinsic curvature R = B^2/2.

        s_2k = 2^k c^{2k} R^k / ((2k)!)^2
        t_2k = 2^k T_2k / (2k)!
    """
    R = gauss_equation([B])
    s_values, t_values = [], []
    for k in range(B.n // 2 + 1):
        scale = Fraction(2**k, factorial(2 * k))
        if not B.exact:
            scale = float(scale)
        s_values.append(gauss_bonnet_h(R, k) * scale)
        if 2 * k < B.n:
            T = lovelock_tensor(R, k)
        else:
            T = zero(B.n, 1, 1, B.mode)
        t_values.append(SymBilinearForm.from_form(T.scale(scale)))
    return EvenInvariants(tuple(s_values), tuple(t_values))


# ============================================================================
# Generalized Laplacian and Lovelock-tensor tests
# ============================================================================


def ell2k_pointwise(T: DoubleForm, hess: DoubleForm):
    """
    l_2k(f) = -<T_2k, Hess f> at a point.

    With T = g this is the non-negative Laplacian -c Hess f.

    Raises:
        DimensionMismatchError: If T and hess live on different dimensions
    """
    if T.n != hess.n:
        raise DimensionMismatchError(
            f"Lovelock tensor on n={T.n} and Hessian on n={hess.n}"
        )
    return -inner_product(T, hess)


def ell2k_star(R: DoubleForm, hess: DoubleForm, k: int):
    """l_2k(f) = -*(g^{n-2k-1} R^k Hess f)/(n-2k-1)!."""
    if 2 * k >= R.n:
        raise DegreeError(f"Order 2k={2 * k} must satisfy 2k < {R.n}")
    return -gauss_bonnet_h_odd_star(R, hess, k)


def is_definite(T: DoubleForm) -> Definiteness:
    """Classify a symmetric bilinear form by the signs of its eigenvalues."""
    eigenvalues = np.linalg.eigvalsh(T.as_matrix())
    tol = TOLERANCES["definiteness"]
    if eigenvalues.size == 0 or np.any(np.abs(eigenvalues) <= tol):
        return Definiteness.DEGENERATE
    if np.all(eigenvalues > 0):
        return Definiteness.POSITIVE
    if np.all(eigenvalues < 0):
        return Definiteness.NEGATIVE
    return Definiteness.INDEFINITE


def _full_tensor(R: DoubleForm) -> np.ndarray:
    """R(e_i, e_j; e_k, e_l) over all axes, skew in each pair."""
    n = R.n
    full = np.zeros((n, n, n, n), dtype=R.coeffs.dtype)
    pairs = [index.entries for index in enumerate_multiindices(n, 2)]
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            value = R.coeffs[a, b]
            full[i, j, k, l] = value
            full[j, i, k, l] = -value
            full[i, j, l, k] = -value
            full[j, i, l, k] = value
    return full


def bianchi_defect(R: DoubleForm) -> float:
    """
    Largest cyclic sum R(x,y;z,w) + R(y,z;x,w) + R(z,x;y,w) over basis vectors.

    Zero for curvature tensors and for products of symmetric bilinear forms.
    """
    _as_curvature(R)
    full = _full_tensor(R)
    cyclic = full + np.transpose(full, (1, 2, 0, 3)) + np.transpose(full, (2, 0, 1, 3))
    if cyclic.size == 0:
        return 0.0
    return float(np.max(np.abs(cyclic)))


def einstein_constant(T: DoubleForm, tol: float | None = None):
    """
    Return lambda when T = lambda g within tolerance, else None.

    A manifold with T_2k = lambda g is (2k)-Einstein; then l_2k = lambda Laplacian.
    """
    if T.bidegree != (1, 1):
        raise BidegreeMismatchError(f"Expected a (1,1) form, got ({T.p},{T.q})")
    tol = TOLERANCES["algebra"] if tol is None else tol
    trace = contract(T, 1).value
    lam = trace / T.n if not T.exact else trace / Fraction(T.n)
    if deviation(T, metric(T.n, T.mode).scale(lam)) > tol:
        return None
    return lam
