"""
Multi-index bases of the exterior powers of an n-dimensional space.

A basis p-vector e_I = e_{i_1} ^ ... ^ e_{i_p} is labelled by a strictly
increasing tuple I. The canonical basis of Lambda^p V is the lexicographically
sorted list of all such tuples; every coefficient array in gbcurv is indexed
by position in that list.

Indices are 0-based internally. ``MultiIndex.one_based`` gives the labels used
in documentation and serialized reports (e_1 .. e_n).

The lookup tables at the bottom (shuffle splits, contraction targets,
complements) are cached per (n, degree) and feed the vectorized kernels in
gbcurv.double_form.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from gbcurv.errors import DegreeError


@dataclass(frozen=True, order=True)
class MultiIndex:
    """Strictly increasing tuple of 0-based axis indices in an n-space."""

    entries: tuple[int, ...]
    n: int

    def __post_init__(self):
        entries = tuple(int(i) for i in self.entries)
        object.__setattr__(self, "entries", entries)
        if not 0 <= len(entries) <= self.n:
            raise DegreeError(
                f"Multi-index {entries} has degree {len(entries)} outside [0, {self.n}]"
            )
        if any(i < 0 or i >= self.n for i in entries):
            raise DegreeError(f"Multi-index {entries} has axes outside [0, {self.n})")
        if any(a >= b for a, b in zip(entries, entries[1:])):
            raise ValueError(f"Multi-index {entries} is not strictly increasing")

    @classmethod
    def from_one_based(cls, entries, n: int) -> "MultiIndex":
        return cls(tuple(i - 1 for i in entries), n)

    @property
    def degree(self) -> int:
        return len(self.entries)

    @property
    def one_based(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in self.entries)

    def __str__(self) -> str:
        return "e_" + "".join(str(i) for i in self.one_based) if self.entries else "1"


def _check_degree(n: int, p: int) -> None:
    if n < 0:
        raise DegreeError(f"Dimension must be non-negative, got {n}")
    if p < 0 or p > n:
        raise DegreeError(f"Degree {p} out of range [0, {n}]")


def basis_size(n: int, p: int) -> int:
    """Number of basis p-vectors, C(n, p)."""
    _check_degree(n, p)
    return comb(n, p)


@lru_cache(maxsize=None)
def _basis_tuples(n: int, p: int) -> tuple[tuple[int, ...], ...]:
    return tuple(combinations(range(n), p))


def enumerate_multiindices(n: int, p: int) -> list[MultiIndex]:
    """
    Enumerate the ordered basis of Lambda^p V.

    Args:
        n: Dimension of V
        p: Degree

    Returns:
        Lexicographically sorted list of the C(n, p) multi-indices

    Raises:
        DegreeError: If p < 0 or p > n
    """
    _check_degree(n, p)
    return [MultiIndex(entries, n) for entries in _basis_tuples(n, p)]


def index_position(index: MultiIndex) -> int:
    """
    Position of a multi-index in the lexicographic basis of its degree.

    Uses the combinatorial number system, O(p * n).
    """
    n, p = index.n, index.degree
    position = 0
    previous = -1
    for j, axis in enumerate(index.entries):
        for skipped in range(previous + 1, axis):
            position += comb(n - 1 - skipped, p - 1 - j)
        previous = axis
    return position


def permutation_sign(sequence) -> int:
    """Sign of the permutation that sorts a sequence of distinct integers."""
    items = list(sequence)
    inversions = sum(
        1
        for a in range(len(items))
        for b in range(a + 1, len(items))
        if items[a] > items[b]
    )
    return -1 if inversions % 2 else 1


def _subset_sign(positions: tuple[int, ...]) -> int:
    # sign of (S, S^c) as a permutation of 0..m-1, S sorted
    inversions = sum(pos - j for j, pos in enumerate(positions))
    return -1 if inversions % 2 else 1


def complement_sign(index: MultiIndex) -> tuple[MultiIndex, int]:
    """
    Complement of a multi-index together with the sign of (I, I^c).

    The classical Hodge star maps e_I to sign * e_{I^c}. Applying this twice
    gives the sign product (-1)^{p(n-p)}.

    Args:
        index: Multi-index I

    Returns:
        Tuple (I^c, sign) with sign in {+1, -1}
    """
    complement = tuple(i for i in range(index.n) if i not in index.entries)
    return MultiIndex(complement, index.n), _subset_sign(index.entries)


# ============================================================================
# Cached lookup tables for double-form kernels
# ============================================================================


@lru_cache(maxsize=None)
def split_table(n: int, p: int, r: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Shuffle decomposition of every basis (p+r)-vector.

    For each K in the basis of degree p+r and each way of choosing p of its
    entries (in lexicographic order), records the position of the chosen
    sub-index in degree p, the position of the remaining sub-index in degree
    r and the shuffle sign.

    Returns:
        Arrays (left, right, sign) of shape (C(n, p+r), C(p+r, p))

    Raises:
        DegreeError: If p + r exceeds n
    """
    _check_degree(n, p + r)
    _check_degree(n, p)
    _check_degree(n, r)

    left_pos = {t: i for i, t in enumerate(_basis_tuples(n, p))}
    right_pos = {t: i for i, t in enumerate(_basis_tuples(n, r))}
    choices = list(combinations(range(p + r), p))

    targets = _basis_tuples(n, p + r)
    left = np.zeros((len(targets), len(choices)), dtype=np.intp)
    right = np.zeros_like(left)
    sign = np.zeros_like(left)
    for row, entries in enumerate(targets):
        for col, chosen in enumerate(choices):
            rest = tuple(j for j in range(p + r) if j not in chosen)
            left[row, col] = left_pos[tuple(entries[j] for j in chosen)]
            right[row, col] = right_pos[tuple(entries[j] for j in rest)]
            sign[row, col] = _subset_sign(chosen)
    return left, right, sign


@lru_cache(maxsize=None)
def contraction_table(n: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Wedge-with-e_i lookup for contracting degree-p arguments.

    Row a runs over the basis of degree p-1, column i over axes. The entry
    gives the position of e_i ^ e_a in degree p and its sign; the sign is 0
    when i already occurs in a.

    Returns:
        Arrays (target, sign) of shape (C(n, p-1), n)
    """
    _check_degree(n, p)
    if p < 1:
        raise DegreeError("Contraction table needs degree p >= 1")

    positions = {t: i for i, t in enumerate(_basis_tuples(n, p))}
    rows = _basis_tuples(n, p - 1)
    target = np.zeros((len(rows), n), dtype=np.intp)
    sign = np.zeros((len(rows), n), dtype=np.intp)
    for row, entries in enumerate(rows):
        for axis in range(n):
            if axis in entries:
                continue
            merged = tuple(sorted(entries + (axis,)))
            target[row, axis] = positions[merged]
            sign[row, axis] = -1 if sum(1 for e in entries if e < axis) % 2 else 1
    return target, sign


@lru_cache(maxsize=None)
def complement_table(n: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Complement positions and signs for the basis of degree p.

    Returns:
        Arrays (position of I^c in degree n-p, sign of (I, I^c)), length C(n, p)
    """
    _check_degree(n, p)
    positions = {t: i for i, t in enumerate(_basis_tuples(n, n - p))}
    rows = _basis_tuples(n, p)
    target = np.zeros(len(rows), dtype=np.intp)
    sign = np.zeros(len(rows), dtype=np.intp)
    for row, entries in enumerate(rows):
        complement = tuple(i for i in range(n) if i not in entries)
        target[row] = positions[complement]
        sign[row] = _subset_sign(entries)
    return target, sign
