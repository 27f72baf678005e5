"""
Product quadrature rules on parameter boxes.

Periodic axes use the trapezoid rule on uniform nodes without the repeated
endpoint, which is spectrally accurate for smooth periodic integrands.
Non-periodic axes use Gauss-Legendre nodes; these are interior, so charts
with singular boundaries (polar axes of hyperspherical coordinates) are never
evaluated on the singular set.

Grid immersions loaded from files carry fixed nodes; grid_rule gives their
trapezoid weights.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from itertools import product

import numpy as np
from numpy.polynomial.legendre import leggauss

from gbcurv.logging_config import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class Domain:
    """Parameter box with per-axis periodic flags."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    periodic: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(x) for x in self.lower))
        object.__setattr__(self, "upper", tuple(float(x) for x in self.upper))
        object.__setattr__(self, "periodic", tuple(bool(x) for x in self.periodic))
        if not len(self.lower) == len(self.upper) == len(self.periodic):
            raise ValueError(
                "Domain bounds and periodic flags must have the same length"
            )
        for axis, (a, b) in enumerate(zip(self.lower, self.upper)):
            if not a < b:
                raise ValueError(f"Domain axis {axis} is empty: [{a}, {b}]")

    @property
    def n(self) -> int:
        return len(self.lower)

    @property
    def all_periodic(self) -> bool:
        return all(self.periodic)

    def midpoint(self) -> np.ndarray:
        return (np.array(self.lower) + np.array(self.upper)) / 2

    def to_dict(self) -> dict:
        return {
            "min": list(self.lower),
            "max": list(self.upper),
            "periodic": list(self.periodic),
        }


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes (m, n) and weights (m,) of a product rule in parameter space."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.points.shape[0] != self.weights.shape[0]:
            raise ValueError(
                f"{self.points.shape[0]} nodes but {self.weights.shape[0]} weights"
            )

    def __len__(self) -> int:
        return self.weights.shape[0]

    def integrate(self, values) -> float:
        """Weighted sum in node order."""
        values = np.asarray(values, dtype=np.float64)
        return float(np.dot(self.weights, values))


def _counts(domain: Domain, grid: int | Sequence[int]) -> list[int]:
    counts = [grid] * domain.n if isinstance(grid, int) else list(grid)
    if len(counts) != domain.n:
        raise ValueError(f"Grid has {len(counts)} axes, domain has {domain.n}")
    if any(m < 1 for m in counts):
        raise ValueError(f"Grid counts must be positive, got {counts}")
    return counts


def axis_rule(
    lower: float, upper: float, count: int, periodic: bool
) -> tuple[np.ndarray, np.ndarray]:
    """One-dimensional nodes and weights on [lower, upper]."""
    width = upper - lower
    if periodic:
        nodes = lower + width * np.arange(count) / count
        return nodes, np.full(count, width / count)

    z, w = leggauss(count)
    return lower + width * (z + 1) / 2, w * width / 2


def _tensor(axes: list[tuple[np.ndarray, np.ndarray]]) -> QuadratureRule:
    points = np.array(list(product(*(nodes for nodes, _ in axes))), dtype=np.float64)
    weights = np.array(
        [np.prod(ws) for ws in product(*(w for _, w in axes))], dtype=np.float64
    )
    return QuadratureRule(points.reshape(len(weights), len(axes)), weights)


def product_rule(domain: Domain, grid: int | Sequence[int]) -> QuadratureRule:
    """
    Tensor-product rule on a parameter box.

    Args:
        domain: Parameter box
        grid: Nodes per axis, one count for all axes or one per axis

    Returns:
        QuadratureRule with nodes in row-major (last axis fastest) order
    """
    counts = _counts(domain, grid)
    axes = [
        axis_rule(a, b, m, periodic)
        for a, b, m, periodic in zip(domain.lower, domain.upper, counts, domain.periodic)
    ]
    rule = _tensor(axes)
    logger.debug(f"Product rule with {len(rule)} nodes (counts {counts})")
    return rule


def grid_nodes(domain: Domain, shape: Sequence[int]) -> list[np.ndarray]:
    """Uniform nodes per axis; periodic axes omit the upper endpoint."""
    nodes = []
    for a, b, m, periodic in zip(domain.lower, domain.upper, shape, domain.periodic):
        if periodic:
            nodes.append(a + (b - a) * np.arange(m) / m)
        else:
            nodes.append(np.linspace(a, b, m))
    return nodes


def grid_rule(domain: Domain, shape: Sequence[int]) -> QuadratureRule:
    """Trapezoid rule on the uniform nodes of a grid immersion."""
    shape = _counts(domain, list(shape))
    axes = []
    widths = [b - a for a, b in zip(domain.lower, domain.upper)]
    for nodes, periodic, m, width in zip(
        grid_nodes(domain, shape), domain.periodic, shape, widths
    ):
        if periodic:
            weights = np.full(m, width / m)
        else:
            spacing = nodes[1] - nodes[0] if m > 1 else 0.0
            weights = np.full(m, spacing)
            weights[0] = weights[-1] = spacing / 2
        axes.append((nodes, weights))
    return _tensor(axes)


def subsample(
    points: np.ndarray, limit: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """
    At most ``limit`` rows of ``points``, drawn without replacement by seed.

    Returns:
        Tuple (points, kept row indices in increasing order)
    """
    indices = np.arange(points.shape[0])
    if points.shape[0] <= limit:
        return points, indices
    rng = np.random.default_rng(seed)
    kept = np.sort(rng.choice(points.shape[0], size=limit, replace=False))
    logger.info(f"Subsampled {limit} of {points.shape[0]} parameter points")
    return points[kept], kept
