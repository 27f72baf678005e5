"""
Immersion charts F: U -> R^N and the built-in catalog.

Two kinds of chart share one interface (position, jacobian, hessian,
quadrature):

- ImmersionChart: symbolic coordinates (sympy expressions in u1..un),
  compiled with lambdify. Derivatives are analytic, or central differences
  with step h when the chart is switched to finite-difference mode.
- GridChart: positions sampled on a uniform grid, loaded from a JSON file.
  Derivatives are second-order centered differences, periodic or one-sided
  per axis, and the chart can only be queried at its nodes.

An immersion lives either in Euclidean space or in the unit sphere of R^N;
in the sphere case the codimension counts normals tangent to the sphere.
"""

import dataclasses
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
import sympy as sp

from gbcurv.config import CATALOG_DEFAULTS, FD_STEP
from gbcurv.errors import CatalogError, ImmersionFileError
from gbcurv.logging_config import get_logger
from gbcurv.quadrature import (
    Domain,
    QuadratureRule,
    grid_nodes,
    grid_rule,
    product_rule,
)

logger = get_logger(__name__)

# Tolerance for the periodic seam check
PERIODIC_SEAM_TOL = 1e-12


class Ambient(str, Enum):
    EUCLIDEAN = "euclidean"
    SPHERE = "sphere"


class DerivativeMode(str, Enum):
    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "finite-difference"


def parameter_symbols(n: int) -> tuple[sp.Symbol, ...]:
    """Real parameter symbols u1 .. un."""
    return tuple(sp.symbols(f"u1:{n + 1}", real=True))


@dataclass(frozen=True, eq=False)
class ImmersionChart:
    """Symbolic immersion of a parameter box into R^N or the unit sphere of R^N."""

    name: str
    symbols: tuple
    exprs: tuple
    domain: Domain
    ambient: Ambient = Ambient.EUCLIDEAN
    closed: bool = False
    derivative_mode: DerivativeMode = DerivativeMode.ANALYTIC
    step: float = FD_STEP
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.symbols) != self.domain.n:
            raise ValueError(
                f"Chart '{self.name}' has {len(self.symbols)} parameters "
                f"but a {self.domain.n}-dimensional domain"
            )
        if self.codimension < 1:
            raise ValueError(
                f"Chart '{self.name}' needs codimension >= 1, got {self.codimension}"
            )
        if self.step <= 0:
            raise ValueError(f"Finite-difference step must be positive, got {self.step}")

        exprs = sp.Matrix([sp.sympify(e) for e in self.exprs])
        object.__setattr__(self, "exprs", tuple(exprs))
        object.__setattr__(self, "_position", sp.lambdify(self.symbols, exprs, "numpy"))

        if self.derivative_mode == DerivativeMode.ANALYTIC:
            jacobian = exprs.jacobian(self.symbols)
            hessian = sp.Matrix(
                [sp.diff(e, a, b) for e in exprs for a in self.symbols for b in self.symbols]
            )
            object.__setattr__(
                self, "_jacobian", sp.lambdify(self.symbols, jacobian, "numpy", cse=True)
            )
            object.__setattr__(
                self, "_hessian", sp.lambdify(self.symbols, hessian, "numpy", cse=True)
            )
        self._check_seams()

    # --- metadata ---------------------------------------------------------

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def ambient_dim(self) -> int:
        return len(self.exprs)

    @property
    def codimension(self) -> int:
        extra = 1 if self.ambient == Ambient.SPHERE else 0
        return len(self.exprs) - self.domain.n - extra

    @property
    def ambient_curvature(self) -> float:
        return 1.0 if self.ambient == Ambient.SPHERE else 0.0

    @property
    def analytic(self) -> bool:
        return self.derivative_mode == DerivativeMode.ANALYTIC

    def describe(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "p": self.codimension,
            "ambient": self.ambient.value,
            "derivatives": self.derivative_mode.value,
            "params": self.params,
        }

    # --- evaluation -------------------------------------------------------

    def position(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=np.float64)
        return np.asarray(self._position(*u), dtype=np.float64).reshape(self.ambient_dim)

    def jacobian(self, u) -> np.ndarray:
        """Matrix (N, n) of partial derivatives dF/du_i."""
        u = np.asarray(u, dtype=np.float64)
        if self.analytic:
            values = np.asarray(self._jacobian(*u), dtype=np.float64)
            return values.reshape(self.ambient_dim, self.n)

        h = self.step
        columns = []
        for i in range(self.n):
            shift = np.zeros(self.n)
            shift[i] = h
            columns.append((self.position(u + shift) - self.position(u - shift)) / (2 * h))
        return np.stack(columns, axis=1)

    def hessian(self, u) -> np.ndarray:
        """Array (N, n, n) of second partial derivatives."""
        u = np.asarray(u, dtype=np.float64)
        N, n = self.ambient_dim, self.n
        if self.analytic:
            return np.asarray(self._hessian(*u), dtype=np.float64).reshape(N, n, n)

        h = self.step
        center = self.position(u)
        result = np.zeros((N, n, n))
        unit = np.eye(n) * h
        for i in range(n):
            plus, minus = self.position(u + unit[i]), self.position(u - unit[i])
            result[:, i, i] = (plus - 2 * center + minus) / h**2
            for j in range(i + 1, n):
                mixed = (
                    self.position(u + unit[i] + unit[j])
                    - self.position(u + unit[i] - unit[j])
                    - self.position(u - unit[i] + unit[j])
                    + self.position(u - unit[i] - unit[j])
                ) / (4 * h**2)
                result[:, i, j] = result[:, j, i] = mixed
        return result

    def quadrature(self, grid) -> QuadratureRule:
        return product_rule(self.domain, grid)

    # --- derived charts ---------------------------------------------------

    def finite_difference(self, step: float = FD_STEP) -> "ImmersionChart":
        """Same immersion with central-difference derivatives of step h."""
        return dataclasses.replace(
            self, derivative_mode=DerivativeMode.FINITE_DIFFERENCE, step=step
        )

    def deformed(self, field_exprs, t: float) -> "ImmersionChart":
        """The immersion F + t xi, with xi given as expressions in the same symbols."""
        if len(field_exprs) != self.ambient_dim:
            raise ValueError(
                f"Variation field has {len(field_exprs)} components, "
                f"chart has {self.ambient_dim}"
            )
        exprs = tuple(e + sp.Float(t) * x for e, x in zip(self.exprs, field_exprs))
        return dataclasses.replace(self, exprs=exprs, name=f"{self.name}[t={t:g}]")

    def _check_seams(self) -> None:
        middle = self.domain.midpoint()
        for axis, periodic in enumerate(self.domain.periodic):
            if not periodic:
                continue
            low, high = middle.copy(), middle.copy()
            low[axis] = self.domain.lower[axis]
            high[axis] = self.domain.upper[axis]
            gap = np.max(np.abs(self.position(low) - self.position(high)))
            if gap > PERIODIC_SEAM_TOL * max(1.0, np.max(np.abs(self.position(low)))):
                raise ValueError(
                    f"Chart '{self.name}' does not close up along periodic axis "
                    f"{axis + 1} (seam gap {gap:.3e})"
                )


def reparametrize(chart: ImmersionChart, maps) -> ImmersionChart:
    """
    Compose a chart with a change of parameters u -> phi(u).

    Args:
        chart: Symbolic chart
        maps: One expression (sympy or string) per parameter, in u1..un

    Returns:
        Chart v -> F(phi(v)) on the same domain
    """
    if len(maps) != chart.n:
        raise ValueError(f"Need {chart.n} coordinate maps, got {len(maps)}")
    names = {str(s): s for s in chart.symbols}
    phi = [sp.sympify(m, locals=names) for m in maps]
    substitution = dict(zip(chart.symbols, phi))
    exprs = tuple(e.subs(substitution, simultaneous=True) for e in chart.exprs)
    return dataclasses.replace(chart, exprs=exprs, name=f"{chart.name}-reparametrized")


# ============================================================================
# Grid charts
# ============================================================================


def _axis_derivative(values: np.ndarray, axis: int, spacing: float, periodic: bool):
    if periodic:
        return (np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (
            2 * spacing
        )
    return np.gradient(values, spacing, axis=axis, edge_order=2)


@dataclass(frozen=True, eq=False)
class GridChart:
    """Immersion sampled on a uniform parameter grid."""

    name: str
    domain: Domain
    shape: tuple[int, ...]
    points: np.ndarray
    ambient: Ambient = Ambient.EUCLIDEAN

    def __post_init__(self):
        shape = tuple(int(m) for m in self.shape)
        object.__setattr__(self, "shape", shape)
        if len(shape) != self.domain.n:
            raise ImmersionFileError(
                f"Grid has {len(shape)} axes but the domain has {self.domain.n}"
            )
        for m in shape:
            if m < 3:
                raise ImmersionFileError(f"Grid axes need at least 3 nodes, got {m}")
        if self.points.shape[: len(shape)] != shape:
            raise ImmersionFileError(
                f"Point array of shape {self.points.shape} does not match grid {shape}"
            )

        spacings = [
            (b - a) / m if periodic else (b - a) / (m - 1)
            for a, b, m, periodic in zip(
                self.domain.lower, self.domain.upper, shape, self.domain.periodic
            )
        ]
        object.__setattr__(self, "_spacings", spacings)

        n = self.domain.n
        firsts = [
            _axis_derivative(self.points, i, spacings[i], self.domain.periodic[i])
            for i in range(n)
        ]
        jac = np.stack(firsts, axis=-1)
        hess = np.empty(self.points.shape + (n, n))
        for i in range(n):
            for j in range(n):
                hess[..., i, j] = _axis_derivative(
                    firsts[j], i, spacings[i], self.domain.periodic[i]
                )
        hess = (hess + np.swapaxes(hess, -1, -2)) / 2
        object.__setattr__(self, "_jacobian", jac)
        object.__setattr__(self, "_hessian", hess)

        if self.codimension < 1:
            raise ImmersionFileError(
                f"Grid immersion needs codimension >= 1, got {self.codimension}"
            )

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[-1]

    @property
    def codimension(self) -> int:
        extra = 1 if self.ambient == Ambient.SPHERE else 0
        return self.ambient_dim - self.n - extra

    @property
    def ambient_curvature(self) -> float:
        return 1.0 if self.ambient == Ambient.SPHERE else 0.0

    @property
    def closed(self) -> bool:
        return self.domain.all_periodic

    @property
    def analytic(self) -> bool:
        return False

    @property
    def derivative_mode(self) -> DerivativeMode:
        return DerivativeMode.FINITE_DIFFERENCE

    def describe(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "p": self.codimension,
            "ambient": self.ambient.value,
            "derivatives": self.derivative_mode.value,
            "grid": list(self.shape),
        }

    def node_index(self, u) -> tuple[int, ...]:
        """Grid multi-index of a parameter point that is a node."""
        u = np.asarray(u, dtype=np.float64)
        index = []
        for axis, value in enumerate(u):
            spacing = self._spacings[axis]
            offset = (value - self.domain.lower[axis]) / spacing
            j = int(round(offset))
            if abs(offset - j) > 1e-9:
                raise ValueError(f"Parameter point {tuple(u)} is not a grid node")
            if self.domain.periodic[axis]:
                j %= self.shape[axis]
            elif not 0 <= j < self.shape[axis]:
                raise ValueError(f"Parameter point {tuple(u)} is outside the grid")
            index.append(j)
        return tuple(index)

    def position(self, u) -> np.ndarray:
        return self.points[self.node_index(u)].copy()

    def jacobian(self, u) -> np.ndarray:
        return self._jacobian[self.node_index(u)].copy()

    def hessian(self, u) -> np.ndarray:
        return self._hessian[self.node_index(u)].copy()

    def quadrature(self, grid=None) -> QuadratureRule:
        """Trapezoid rule on the chart's own nodes; ``grid`` is ignored."""
        return grid_rule(self.domain, self.shape)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.codimension,
            "ambient": self.ambient.value,
            "domain": self.domain.to_dict(),
            "grid": list(self.shape),
            "points": self.points.reshape(-1, self.ambient_dim).tolist(),
        }


def sample_chart_on_grid(chart: ImmersionChart, shape) -> GridChart:
    """Tabulate a symbolic chart on the uniform nodes of its domain."""
    nodes = grid_nodes(chart.domain, shape)
    mesh = np.stack(np.meshgrid(*nodes, indexing="ij"), axis=-1)
    flat = mesh.reshape(-1, chart.n)
    points = np.array([chart.position(u) for u in flat])
    return GridChart(
        name=f"{chart.name}-grid",
        domain=chart.domain,
        shape=tuple(shape),
        points=points.reshape(tuple(shape) + (chart.ambient_dim,)),
        ambient=chart.ambient,
    )


def load_grid_chart(path: str | Path) -> GridChart:
    """
    Load a grid immersion from a JSON file.

    Expected keys: n, p, domain {min, max, periodic}, grid, points (row-major
    list of positions); optional ambient ("euclidean" or "sphere").

    Raises:
        ImmersionFileError: If the file is unreadable or malformed
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ImmersionFileError(f"Cannot read immersion file '{path}': {e}") from e

    try:
        n, p = int(data["n"]), int(data["p"])
        domain = Domain(
            data["domain"]["min"], data["domain"]["max"], data["domain"]["periodic"]
        )
        shape = tuple(int(m) for m in data["grid"])
        ambient = Ambient(data.get("ambient", Ambient.EUCLIDEAN.value))
        width = n + p + (1 if ambient == Ambient.SPHERE else 0)
        points = np.asarray(data["points"], dtype=np.float64)
        points = points.reshape(shape + (width,))
    except KeyError as e:
        raise ImmersionFileError(f"Immersion file '{path}' is missing key {e}") from e
    except (TypeError, ValueError) as e:
        raise ImmersionFileError(f"Immersion file '{path}' is malformed: {e}") from e

    if domain.n != n:
        raise ImmersionFileError(
            f"Immersion file '{path}' declares n={n} but a {domain.n}-axis domain"
        )
    logger.info(f"Loaded grid immersion '{path.name}' with grid {list(shape)}")
    return GridChart(path.stem, domain, shape, points, ambient)


# ============================================================================
# Catalog
# ============================================================================


def _sphere_coordinates(symbols, radius) -> list:
    """Hyperspherical coordinates; the last symbol is the azimuth."""
    coords = []
    sines = sp.Integer(1)
    for angle in symbols[:-1]:
        coords.append(radius * sines * sp.cos(angle))
        sines = sines * sp.sin(angle)
    coords.append(radius * sines * sp.cos(symbols[-1]))
    coords.append(radius * sines * sp.sin(symbols[-1]))
    return coords


def _sphere_domain(n: int) -> Domain:
    return Domain(
        [0.0] * n,
        [np.pi] * (n - 1) + [2 * np.pi],
        [False] * (n - 1) + [True],
    )


def _check_dimension(n, name: str) -> int:
    n = int(n)
    if n < 2:
        raise CatalogError(f"'{name}' needs dimension n >= 2, got {n}")
    return n


def round_sphere(n: int, r: float) -> ImmersionChart:
    """Round sphere S^n(r) in R^{n+1}."""
    n = _check_dimension(n, "round_sphere")
    if r <= 0:
        raise CatalogError(f"'round_sphere' needs r > 0, got {r}")
    u = parameter_symbols(n)
    return ImmersionChart(
        "round_sphere",
        u,
        tuple(_sphere_coordinates(u, sp.Float(r))),
        _sphere_domain(n),
        closed=True,
        params={"n": n, "r": r},
    )


def small_sphere_in_sphere(n: int, r: float) -> ImmersionChart:
    """Sphere S^n(r) at height sqrt(1 - r^2) inside the unit S^{n+1}."""
    n = _check_dimension(n, "small_sphere_in_sphere")
    if not 0 < r <= 1:
        raise CatalogError(f"'small_sphere_in_sphere' needs 0 < r <= 1, got {r}")
    u = parameter_symbols(n)
    height = sp.sqrt(1 - sp.Rational(r) ** 2) if r != 1 else sp.Integer(0)
    coords = _sphere_coordinates(u, sp.Rational(r)) + [height]
    return ImmersionChart(
        "small_sphere_in_sphere",
        u,
        tuple(coords),
        _sphere_domain(n),
        ambient=Ambient.SPHERE,
        closed=True,
        params={"n": n, "r": r},
    )


def equator(n: int) -> ImmersionChart:
    """Totally geodesic S^n inside the unit S^{n+1}."""
    chart = small_sphere_in_sphere(n, 1)
    return dataclasses.replace(chart, name="equator", params={"n": int(n)})


def flat_torus(radii) -> ImmersionChart:
    """Product of circles of the given radii in R^{2n}."""
    radii = [float(r) for r in (radii if isinstance(radii, list) else [radii])]
    if len(radii) < 2 or any(r <= 0 for r in radii):
        raise CatalogError(f"'flat_torus' needs at least two positive radii, got {radii}")
    n = len(radii)
    u = parameter_symbols(n)
    coords = []
    for r, angle in zip(radii, u):
        coords.extend([sp.Float(r) * sp.cos(angle), sp.Float(r) * sp.sin(angle)])
    return ImmersionChart(
        "flat_torus",
        u,
        tuple(coords),
        Domain([0.0] * n, [2 * np.pi] * n, [True] * n),
        closed=True,
        params={"radii": radii},
    )


def clifford_torus() -> ImmersionChart:
    """Minimal flat torus in the unit S^3."""
    u = parameter_symbols(2)
    scale = 1 / sp.sqrt(2)
    coords = (
        scale * sp.cos(u[0]),
        scale * sp.sin(u[0]),
        scale * sp.cos(u[1]),
        scale * sp.sin(u[1]),
    )
    return ImmersionChart(
        "clifford_torus",
        u,
        coords,
        Domain([0.0, 0.0], [2 * np.pi, 2 * np.pi], [True, True]),
        ambient=Ambient.SPHERE,
        closed=True,
    )


def catenoid(a: float, height: float) -> ImmersionChart:
    """Catenoid of neck radius a over |u2| <= height; a minimal surface."""
    if a <= 0 or height <= 0:
        raise CatalogError(f"'catenoid' needs a > 0 and height > 0, got {a}, {height}")
    u = parameter_symbols(2)
    a = sp.Float(a)
    radius = a * sp.cosh(u[1] / a)
    coords = (radius * sp.cos(u[0]), radius * sp.sin(u[0]), u[1])
    return ImmersionChart(
        "catenoid",
        u,
        coords,
        Domain([0.0, -height], [2 * np.pi, height], [True, False]),
        params={"a": float(a), "height": height},
    )


def kahler_graph(extent: float) -> ImmersionChart:
    """Graph of (z, w) -> zw, a complex surface in C^3 = R^6."""
    if extent <= 0:
        raise CatalogError(f"'kahler_graph' needs extent > 0, got {extent}")
    x1, y1, x2, y2 = parameter_symbols(4)
    coords = (x1, y1, x2, y2, x1 * x2 - y1 * y2, x1 * y2 + y1 * x2)
    return ImmersionChart(
        "kahler_graph",
        (x1, y1, x2, y2),
        coords,
        Domain([-extent] * 4, [extent] * 4, [False] * 4),
        params={"extent": extent},
    )


def graph_of_polynomial(expr: str, extent: float, n: int | None = None) -> ImmersionChart:
    """Graph u -> (u, f(u)) of an expression in u1..un over [-extent, extent]^n."""
    if extent <= 0:
        raise CatalogError(f"'graph_of_polynomial' needs extent > 0, got {extent}")
    parsed = sp.sympify(str(expr))
    indices = []
    for symbol in parsed.free_symbols:
        name = str(symbol)
        if not (name.startswith("u") and name[1:].isdigit() and int(name[1:]) >= 1):
            raise CatalogError(
                f"'graph_of_polynomial' expression uses unknown symbol '{name}'"
            )
        indices.append(int(name[1:]))
    n = int(n) if n is not None else max([2, *indices])
    if indices and max(indices) > n:
        raise CatalogError(f"Expression uses u{max(indices)} but n={n}")

    u = parameter_symbols(n)
    f = sp.sympify(str(expr), locals={str(s): s for s in u})
    return ImmersionChart(
        "graph_of_polynomial",
        u,
        tuple(u) + (f,),
        Domain([-extent] * n, [extent] * n, [False] * n),
        params={"expr": str(expr), "extent": extent, "n": n},
    )


CATALOG = {
    "round_sphere": round_sphere,
    "small_sphere_in_sphere": small_sphere_in_sphere,
    "equator": equator,
    "flat_torus": flat_torus,
    "clifford_torus": clifford_torus,
    "catenoid": catenoid,
    "kahler_graph": kahler_graph,
    "graph_of_polynomial": graph_of_polynomial,
}

# Parameters accepted beyond the declared defaults
_OPTIONAL_PARAMS = {"graph_of_polynomial": {"n"}}


def _collect_radii(params: dict) -> dict:
    """Fold r1=..., r2=... into radii=[...]."""
    numbered = {
        int(key[1:]): value
        for key, value in params.items()
        if key.startswith("r") and key[1:].isdigit()
    }
    if not numbered:
        return params
    if "radii" in params:
        raise CatalogError("Give either radii=... or r1=..., r2=..., not both")
    if sorted(numbered) != list(range(1, len(numbered) + 1)):
        raise CatalogError(f"Radii must be numbered r1..r{len(numbered)}")
    rest = {k: v for k, v in params.items() if not (k.startswith("r") and k[1:].isdigit())}
    rest["radii"] = [numbered[i] for i in sorted(numbered)]
    return rest


def build_chart(name: str, params: dict | None = None) -> ImmersionChart:
    """
    Build a catalog immersion from its name and parameters.

    Unspecified parameters take the defaults from config.CATALOG_DEFAULTS.

    Raises:
        CatalogError: If the name or a parameter is unknown or invalid
    """
    if name not in CATALOG:
        raise CatalogError(
            f"Unknown immersion '{name}'; choose from {sorted(CATALOG)}"
        )
    params = dict(params or {})
    if name == "flat_torus":
        params = _collect_radii(params)
    merged = dict(CATALOG_DEFAULTS[name])
    allowed = set(merged) | _OPTIONAL_PARAMS.get(name, set())
    for key, value in params.items():
        if key not in allowed:
            raise CatalogError(f"Immersion '{name}' has no parameter '{key}'")
        merged[key] = value

    try:
        chart = CATALOG[name](**merged)
    except (TypeError, ValueError, sp.SympifyError) as e:
        raise CatalogError(f"Invalid parameters for '{name}': {e}") from e
    logger.debug(f"Built chart '{name}' with {merged}")
    return chart


def resolve_immersion(target: str, params: dict | None = None):
    """Catalog chart by name, or a grid chart when ``target`` is a JSON file path."""
    if target.endswith(".json") or Path(target).is_file():
        if params:
            raise CatalogError("Grid immersion files take no parameters")
        return load_grid_chart(target)
    return build_chart(target, params)
