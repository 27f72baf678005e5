"""
Elementary symmetric functions and Newton transformations of a symmetric
bilinear form, computed through the double-form algebra.

    s_k(B) = c^k B^k / (k!)^2 = *(g^{n-k} B^k) / (k! (n-k)!)
    t_k(B) = *(g^{n-k-1} B^k) / ((n-k-1)! k!),   t_n(B) = 0

No eigenvalue solver is involved; eigenvalue-based oracles live in the
certification suites (gbcurv.identities) and the tests.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from gbcurv.double_form import (
    SymBilinearForm,
    coerce_factor,
    contract,
    exterior_product,
    hodge_star,
    inverse_factorial,
    metric,
    power,
    zero,
)
from gbcurv.errors import DegreeError
from gbcurv.logging_config import get_logger

logger = get_logger(__name__)


def _check_order(B: SymBilinearForm, k: int) -> None:
    if k < 0 or k > B.n:
        raise DegreeError(f"Order k={k} out of range [0, {B.n}]")


@dataclass(frozen=True)
class SymmetricFunctionTable(Sequence):
    """s_0 .. s_n of a symmetric bilinear form, indexed by degree."""

    values: tuple
    source: SymBilinearForm

    def __post_init__(self):
        if len(self.values) != self.source.n + 1:
            raise ValueError(
                f"Table needs {self.source.n + 1} values, got {len(self.values)}"
            )
        if self.values[0] != 1:
            raise ValueError("s_0 must equal 1")

    def __getitem__(self, k):
        return self.values[k]

    def __len__(self) -> int:
        return len(self.values)

    @property
    def n(self) -> int:
        return self.source.n


def elementary_symmetric(B: SymBilinearForm, k: int):
    """
    k-th elementary symmetric function of the eigenvalues of B.

    Computed as c^k(B^k) / (k!)^2.

    Raises:
        DegreeError: If k is outside [0, n]
    """
    _check_order(B, k)
    factor = inverse_factorial(k, B.exact) ** 2
    return contract(power(B, k), k).value * factor


def elementary_symmetric_star(B: SymBilinearForm, k: int):
    """s_k through the star route, *(g^{n-k} B^k) / (k! (n-k)!)."""
    _check_order(B, k)
    g = metric(B.n, B.mode)
    top = exterior_product(power(g, B.n - k), power(B, k))
    factor = inverse_factorial(k, B.exact) * inverse_factorial(B.n - k, B.exact)
    return hodge_star(top).value * factor


def trace_form(B: SymBilinearForm):
    """s_1 = *(g^{n-1} B / (n-1)!)."""
    return elementary_symmetric_star(B, 1)


def determinant_form(B: SymBilinearForm):
    """s_n = *(B^n / n!)."""
    return hodge_star(power(B, B.n)).value * inverse_factorial(B.n, B.exact)


def symmetric_function_table(B: SymBilinearForm) -> SymmetricFunctionTable:
    """Build the table s_0 .. s_n of B."""
    values = tuple(elementary_symmetric(B, k) for k in range(B.n + 1))
    logger.debug(f"Symmetric functions of a form on n={B.n}: {values}")
    return SymmetricFunctionTable(values, B)


def newton_transform(B: SymBilinearForm, k: int) -> SymBilinearForm:
    """
    k-th Newton transformation t_k(B) = *(g^{n-k-1} B^k) / ((n-k-1)! k!).

    t_n(B) is the zero form by convention.

    Raises:
        DegreeError: If k is outside [0, n]
    """
    _check_order(B, k)
    n = B.n
    if k == n:
        return SymBilinearForm.from_form(zero(n, 1, 1, B.mode))

    g = metric(n, B.mode)
    top = exterior_product(power(g, n - k - 1), power(B, k))
    factor = inverse_factorial(n - k - 1, B.exact) * inverse_factorial(k, B.exact)
    return SymBilinearForm.from_form(hodge_star(top).scale(factor))


def newton_transform_contracted(B: SymBilinearForm, k: int) -> SymBilinearForm:
    """
    t_k(B) = s_k(B) g - c^{k-1} B^k / ((k-1)! k!), the contraction route.

    t_0 = g and t_n = 0 by convention.
    """
    _check_order(B, k)
    g = metric(B.n, B.mode)
    if k == 0:
        return g
    if k == B.n:
        return SymBilinearForm.from_form(zero(B.n, 1, 1, B.mode))

    s_k = elementary_symmetric(B, k)
    factor = inverse_factorial(k - 1, B.exact) * inverse_factorial(k, B.exact)
    tail = contract(power(B, k), k - 1).scale(factor)
    return SymBilinearForm.from_form(g.scale(s_k) - tail)


def shift_expansion(B: SymBilinearForm, shift, k: int):
    """
    s_k(B + shift*g) expanded in the symmetric functions of B.

    Returns sum_i C(n-i, k-i) s_i(B) shift^{k-i}.

    Args:
        B: Symmetric bilinear form
        shift: Scalar multiple of the metric added to B
        k: Order, 0 <= k <= n

    Raises:
        DegreeError: If k is outside [0, n]
    """
    _check_order(B, k)
    shift = coerce_factor(shift, B.exact)
    total = Fraction(0) if B.exact else 0.0
    for i in range(k + 1):
        total += comb(B.n - i, k - i) * elementary_symmetric(B, i) * shift ** (k - i)
    return total
