"""
Geometric verifications on immersion charts.

Sample sweeps (minimality, coordinate harmonicity, sphere check) fan out over
a thread pool; results are written into index-addressed slots so every report
lists samples in parameter order, whatever the completion order. Integrals
are reduced in node order.

    minimality_residual     max |h_2k+1(N_a)| over samples and normals
    coordinate_harmonicity  l_2k F = sum_a h_2k+1(N_a) N_a, componentwise
    sphere_eigen_check      l_2k F = phi F for immersions into the unit sphere
    first_variation         d/dt H_2k(F + t xi) at 0 vs. the integral of h_2k+1(xi^perp)
    pointwise_product_rule  l(fg) = f l(g) + g l(f) - 2 T(grad f, grad g)
"""

import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np
import sympy as sp

from gbcurv.charts import Ambient
from gbcurv.config import (
    MAX_SWEEP_SAMPLES,
    TOLERANCES,
    VARIATION_DT,
    VARIATION_FIELDS,
    get_worker_count,
)
from gbcurv.curvature import (
    gauss_bonnet_h,
    gauss_bonnet_h_odd,
    gauss_bonnet_table,
    lovelock_tensor,
)
from gbcurv.double_form import zero
from gbcurv.errors import DegreeError, InvalidVariationError, RouteMismatchError
from gbcurv.geometry import (
    ScalarField,
    ell2k_at,
    ell2k_of_position,
    frame_at,
    gradient_at,
    lovelock_at,
    riemann_at,
    second_fundamental_forms,
)
from gbcurv.logging_config import get_logger
from gbcurv.quadrature import subsample
from gbcurv.report import InvariantReport, SampleRecord, default_tolerance

logger = get_logger(__name__)


# ============================================================================
# Sweeps
# ============================================================================


def _workers(deterministic: bool, workers: int | None) -> int:
    if deterministic:
        return 1
    return workers or get_worker_count()


def run_sweep(
    points: np.ndarray,
    evaluate: Callable[[np.ndarray], object],
    label: str,
    workers: int = 1,
) -> list:
    """
    Evaluate a function at every parameter point, in parallel.

    Args:
        points: Parameter points, shape (m, n)
        evaluate: Function of one point
        label: Name used in log lines and error messages
        workers: Thread count

    Returns:
        Results in the order of ``points``

    Raises:
        ValueError: Library errors (degenerate immersion, off-sphere sample)
            propagate unchanged
        RuntimeError: If any other evaluation fails
    """
    logger.info(f"Starting {label} sweep over {len(points)} points ({workers} workers)")
    results = [None] * len(points)

    def guarded(index: int):
        try:
            return evaluate(points[index])
        except (ValueError, RouteMismatchError):
            raise
        except Exception as e:
            raise RuntimeError(
                f"{label} failed at u={tuple(points[index])}: {e}"
            ) from e

    if workers == 1:
        for index in range(len(points)):
            results[index] = guarded(index)
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(guarded, i): i for i in range(len(points))}
            for future in as_completed(futures):
                results[futures[future]] = future.result()

    logger.info(f"Completed {label} sweep ({len(results)} points)")
    return results


def sample_points(chart, grid: int, seed: int = 0) -> np.ndarray:
    """Quadrature nodes of the chart, subsampled by seed above MAX_SWEEP_SAMPLES."""
    points, _ = subsample(chart.quadrature(grid).points, MAX_SWEEP_SAMPLES, seed)
    return points


def _check_points(points) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[0] == 0 or points.size == 0:
        raise ValueError("Sample list is empty")
    return points


def _check_order(chart, k: int, strict: bool) -> None:
    limit_ok = 2 * k < chart.n if strict else 2 * k <= chart.n
    if k < 0 or not limit_ok:
        bound = "<" if strict else "<="
        raise DegreeError(f"Order 2k={2 * k} must satisfy 0 <= 2k {bound} {chart.n}")


def _timed(start: float, deterministic: bool) -> dict | None:
    return None if deterministic else {"sweep_seconds": time.perf_counter() - start}


# ============================================================================
# Minimality
# ============================================================================


def minimality_residual(
    chart,
    k: int,
    samples,
    tol: float | None = None,
    workers: int | None = None,
    deterministic: bool = False,
    dump_tensors: bool = False,
    check: str = "minimality",
) -> InvariantReport:
    """
    (2k)-minimality residual max |h_2k+1(N_a)| over samples and normal directions.

    Args:
        chart: Immersion chart
        k: Half order, 2k <= n
        samples: Parameter points
        tol: Verdict tolerance, defaults by derivative mode
        dump_tensors: Record B, R and T_2k of every sample
        check: Report label, "minimality" or "invariants"

    Returns:
        InvariantReport with verdict "minimal" iff max residual < tol

    Raises:
        DegreeError: If 2k > n
        DegenerateImmersionError: If the chart degenerates at a sample
    """
    _check_order(chart, k, strict=False)
    points = _check_points(samples)
    tol = default_tolerance(chart) if tol is None else tol

    def evaluate(u):
        frame = frame_at(chart, u)
        Bs = second_fundamental_forms(chart, u, frame)
        R = riemann_at(chart, u, frame)
        T = lovelock_tensor(R, k) if 2 * k < chart.n else zero(chart.n, 1, 1)
        h_odd = [float(gauss_bonnet_h_odd(R, B, k)) for B in Bs]
        extra = {}
        if dump_tensors:
            extra["tensors"] = {
                "B": [B.to_dict() for B in Bs],
                "R": R.to_dict(),
                "T": T.to_dict(),
            }
        logger.debug(f"u={tuple(u)}: h_{2 * k + 1} = {h_odd}")
        return SampleRecord(
            u=u.tolist(),
            h=[float(x) for x in gauss_bonnet_table(R)],
            T_spectrum=sorted(np.linalg.eigvalsh(T.as_matrix()).tolist()),
            h_odd=h_odd,
            residual=max((abs(x) for x in h_odd), default=0.0),
            extra=extra,
        )

    start = time.perf_counter()
    records = run_sweep(points, evaluate, "minimality", _workers(deterministic, workers))
    return InvariantReport.build(
        check,
        chart.describe(),
        k,
        records,
        tol,
        timings=_timed(start, deterministic),
    )


def coordinate_harmonicity(
    chart,
    k: int,
    samples,
    tol: float | None = None,
    workers: int | None = None,
    deterministic: bool = False,
) -> InvariantReport:
    """
    l_2k of the ambient coordinate functions against sum_a h_2k+1(N_a) N_a.

    The report's residual is max |l_2k F_i| (verdict "harmonic"); the
    extras carry the largest violation of the componentwise identity and
    whether harmonicity agrees with minimality.

    Raises:
        ValueError: If the chart is not in Euclidean space
        DegreeError: If 2k >= n
    """
    if chart.ambient != Ambient.EUCLIDEAN:
        raise ValueError("Coordinate harmonicity needs a Euclidean immersion")
    _check_order(chart, k, strict=True)
    points = _check_points(samples)
    tol = default_tolerance(chart) if tol is None else tol

    def evaluate(u):
        frame = frame_at(chart, u)
        Bs = second_fundamental_forms(chart, u, frame)
        R = riemann_at(chart, u, frame)
        T = lovelock_tensor(R, k)
        ell = ell2k_of_position(frame, T)
        h_odd = [float(gauss_bonnet_h_odd(R, B, k)) for B in Bs]
        predicted = sum(
            (h * N for h, N in zip(h_odd, frame.normal)), np.zeros(frame.position.shape)
        )
        identity = float(np.max(np.abs(ell - predicted)))
        return SampleRecord(
            u=u.tolist(),
            h=[float(x) for x in gauss_bonnet_table(R)],
            T_spectrum=sorted(np.linalg.eigvalsh(T.as_matrix()).tolist()),
            h_odd=h_odd,
            residual=float(np.max(np.abs(ell))),
            extra={"ell_F": ell.tolist(), "identity_residual": identity},
        )

    start = time.perf_counter()
    records = run_sweep(points, evaluate, "harmonicity", _workers(deterministic, workers))
    identity = max(r.extra["identity_residual"] for r in records)
    minimal = max(max((abs(x) for x in r.h_odd), default=0.0) for r in records) < tol
    harmonic = max(r.residual for r in records) < tol
    extras = {
        "identity_residual": identity,
        "minimal": minimal,
        "consistent": bool(identity < tol and minimal == harmonic),
    }
    return InvariantReport.build(
        "harmonicity",
        chart.describe(),
        k,
        records,
        tol,
        extras=extras,
        timings=_timed(start, deterministic),
    )


def sphere_eigen_check(
    chart,
    k: int,
    samples,
    tol: float | None = None,
    workers: int | None = None,
    deterministic: bool = False,
) -> InvariantReport:
    """
    Residual of l_2k F = phi F for an immersion into the unit sphere.

    phi(u) = <l_2k F, F>; the verdict is "minimal-in-sphere" iff
    max |l_2k F - phi F| < tol.

    Raises:
        ValueError: If the chart is not a sphere immersion
        OffSphereError: If a sample does not lie on the unit sphere
    """
    if chart.ambient != Ambient.SPHERE:
        raise ValueError("Sphere check needs an immersion into the unit sphere")
    _check_order(chart, k, strict=True)
    points = _check_points(samples)
    tol = default_tolerance(chart) if tol is None else tol

    def evaluate(u):
        frame = frame_at(chart, u)
        Bs = second_fundamental_forms(chart, u, frame)
        R = riemann_at(chart, u, frame)
        T = lovelock_tensor(R, k)
        ell = ell2k_of_position(frame, T)
        phi = float(ell @ frame.position)
        return SampleRecord(
            u=u.tolist(),
            h=[float(x) for x in gauss_bonnet_table(R)],
            T_spectrum=sorted(np.linalg.eigvalsh(T.as_matrix()).tolist()),
            h_odd=[float(gauss_bonnet_h_odd(R, B, k)) for B in Bs],
            residual=float(np.max(np.abs(ell - phi * frame.position))),
            extra={"phi": phi},
        )

    start = time.perf_counter()
    records = run_sweep(points, evaluate, "sphere-check", _workers(deterministic, workers))
    phis = [r.extra["phi"] for r in records]
    return InvariantReport.build(
        "sphere-check",
        chart.describe(),
        k,
        records,
        tol,
        extras={"phi_min": min(phis), "phi_max": max(phis)},
        timings=_timed(start, deterministic),
    )


# ============================================================================
# Integrals and the first variation
# ============================================================================


def _integrate(chart, grid, density: Callable, label: str, workers: int) -> float:
    rule = chart.quadrature(grid)
    values = run_sweep(rule.points, density, label, workers)
    return rule.integrate(values)


def total_gauss_bonnet(
    chart, k: int, grid, workers: int | None = None, deterministic: bool = False
) -> float:
    """
    H_2k = integral of h_2k over the chart, by the chart's quadrature rule.

    For 2k = n on a closed surface-like chart this is the Gauss-Bonnet total,
    invariant under deformation.
    """
    _check_order(chart, k, strict=False)

    def density(u):
        frame = frame_at(chart, u)
        R = riemann_at(chart, u, frame)
        return float(gauss_bonnet_h(R, k)) * frame.volume_density

    return _integrate(chart, grid, density, f"H_{2 * k}", _workers(deterministic, workers))


@dataclass(frozen=True)
class VariationField:
    """Ambient vector field along a chart, given by one expression per component."""

    kind: str
    exprs: tuple
    compact_support: bool = False


def variation_field(chart, kind: str, seed: int = 0) -> VariationField:
    """
    Build a variation field of the given kind.

    - radial: xi = F
    - tangent: xi = dF/du along the last periodic axis, a reparametrization flow
    - random: xi(x) = M x + sin(<a, x>) v with seeded M, a, v, a smooth
      function of position

    Raises:
        InvalidVariationError: If the kind is unknown or does not apply
    """
    if kind not in VARIATION_FIELDS:
        raise InvalidVariationError(
            f"Unknown variation field '{kind}'; choose from {VARIATION_FIELDS}"
        )
    if not hasattr(chart, "exprs"):
        raise InvalidVariationError("Variation fields need a symbolic chart")

    exprs = sp.Matrix(chart.exprs)
    if kind == "radial":
        return VariationField(kind, tuple(exprs))

    if kind == "tangent":
        periodic_axes = [i for i, p in enumerate(chart.domain.periodic) if p]
        if not periodic_axes:
            raise InvalidVariationError(
                "Tangent variation needs a periodic axis to flow along"
            )
        axis = chart.symbols[periodic_axes[-1]]
        return VariationField(kind, tuple(sp.diff(e, axis) for e in exprs))

    rng = np.random.default_rng(seed)
    N = len(exprs)
    M = rng.uniform(-0.5, 0.5, size=(N, N))
    a = rng.uniform(-1.0, 1.0, size=N)
    v = rng.uniform(-0.5, 0.5, size=N)
    phase = sum(sp.Float(a[j]) * exprs[j] for j in range(N))
    components = tuple(
        sum(sp.Float(M[i, j]) * exprs[j] for j in range(N)) + sp.Float(v[i]) * sp.sin(phase)
        for i in range(N)
    )
    return VariationField(kind, components)


@dataclass(frozen=True)
class VariationResult:
    """Numeric derivative of H_2k(t) at 0 next to the predicted first variation."""

    numeric: float
    richardson: float
    predicted: float
    tolerance: float
    k: int
    dt: float
    kind: str

    @property
    def difference(self) -> float:
        return abs(self.richardson - self.predicted)

    @property
    def ratio(self) -> float | None:
        if self.predicted == 0:
            return None
        return self.richardson / self.predicted

    @property
    def passed(self) -> bool:
        return self.difference <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "field": self.kind,
            "k": self.k,
            "dt": self.dt,
            "numeric": self.numeric,
            "richardson": self.richardson,
            "predicted": self.predicted,
            "difference": self.difference,
            "ratio": self.ratio,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def first_variation(
    chart,
    field: VariationField,
    k: int,
    grid,
    dt: float = VARIATION_DT,
    workers: int | None = None,
    deterministic: bool = False,
) -> VariationResult:
    """
    Check H_2k'(0) = integral of h_2k+1(xi^perp) on a closed chart.

    The numeric side is the centered difference [H(dt) - H(-dt)]/(2dt),
    Richardson-extrapolated with step dt/2. For 2k = n the prediction is 0.

    Args:
        chart: Closed symbolic chart in Euclidean space
        field: Variation field
        k: Half order, 2k <= n
        grid: Quadrature nodes per axis
        dt: Time step

    Raises:
        InvalidVariationError: If the chart is open and the field is not
            compactly supported, or the chart cannot be deformed
        DegreeError: If 2k > n
    """
    if not hasattr(chart, "deformed"):
        raise InvalidVariationError("Grid immersions cannot be deformed")
    if chart.ambient != Ambient.EUCLIDEAN:
        raise InvalidVariationError("Variations are supported in Euclidean space only")
    if not (chart.closed or field.compact_support):
        raise InvalidVariationError(
            f"Chart '{chart.name}' is not closed and the '{field.kind}' field "
            "is not compactly supported"
        )
    _check_order(chart, k, strict=False)
    pool = _workers(deterministic, workers)

    def total(t: float) -> float:
        return total_gauss_bonnet(chart.deformed(field.exprs, t), k, grid, workers=pool)

    def centered(step: float) -> float:
        return (total(step) - total(-step)) / (2 * step)

    numeric = centered(dt)
    richardson = (4 * centered(dt / 2) - numeric) / 3

    xi = sp.lambdify(chart.symbols, sp.Matrix(field.exprs), "numpy")

    def density(u):
        if 2 * k == chart.n:
            return 0.0
        frame = frame_at(chart, u)
        Bs = second_fundamental_forms(chart, u, frame)
        R = riemann_at(chart, u, frame)
        vector = np.asarray(xi(*u), dtype=np.float64).reshape(-1)
        value = sum(
            float(vector @ N) * float(gauss_bonnet_h_odd(R, B, k))
            for N, B in zip(frame.normal, Bs)
        )
        return value * frame.volume_density

    predicted = _integrate(chart, grid, density, f"h_{2 * k + 1}(xi)", pool)
    tolerance = max(TOLERANCES["variation_abs"], TOLERANCES["variation_rel"] * abs(predicted))
    result = VariationResult(numeric, richardson, predicted, tolerance, k, dt, field.kind)
    logger.info(
        f"First variation of H_{2 * k} along '{field.kind}': "
        f"numeric {richardson:.6e}, predicted {predicted:.6e}"
    )
    return result


# ============================================================================
# Generalized Laplacian identities
# ============================================================================


def pointwise_product_rule(chart, u, f: ScalarField, g: ScalarField, k: int) -> float:
    """
    l(fg) - f l(g) - g l(f) + 2 T_2k(grad f, grad g) at u; vanishes identically.

    Raises:
        DegreeError: If 2k >= n
    """
    frame = frame_at(chart, u)
    T = lovelock_at(chart, u, k, frame)
    u = frame.u
    lfg = ell2k_at(chart, u, f.product(g), k, frame)
    lf = ell2k_at(chart, u, f, k, frame)
    lg = ell2k_at(chart, u, g, k, frame)
    cross = gradient_at(chart, u, f, frame) @ T.as_matrix() @ gradient_at(chart, u, g, frame)
    return float(lfg - f.value(u) * lg - g.value(u) * lf + 2 * cross)


@dataclass(frozen=True)
class IntegralCheck:
    """An integral that should vanish, with the scale it is measured against."""

    name: str
    value: float
    scale: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return abs(self.value) <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "scale": self.scale,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def _require_closed(chart) -> None:
    if not chart.closed:
        raise InvalidVariationError(
            f"Chart '{chart.name}' is not closed; integral identities need a closed chart"
        )


def integral_zero_check(
    chart,
    f: ScalarField,
    k: int,
    grid,
    tol: float | None = None,
    workers: int | None = None,
) -> IntegralCheck:
    """Integral of l_2k f over a closed chart; l_2k f is a divergence, so it vanishes."""
    _require_closed(chart)
    _check_order(chart, k, strict=True)
    tol = TOLERANCES["geometry_fd"] if tol is None else tol

    def density(u):
        frame = frame_at(chart, u)
        return ell2k_at(chart, u, f, k, frame) * frame.volume_density

    def magnitude(u):
        frame = frame_at(chart, u)
        return abs(ell2k_at(chart, u, f, k, frame)) * frame.volume_density

    pool = _workers(False, workers)
    value = _integrate(chart, grid, density, f"l_{2 * k}", pool)
    scale = _integrate(chart, grid, magnitude, f"|l_{2 * k}|", pool)
    return IntegralCheck(f"integral of l_{2 * k}({f.name})", value, scale, tol)


def quadratic_form_check(
    chart,
    f: ScalarField,
    k: int,
    grid,
    tol: float | None = None,
    workers: int | None = None,
) -> IntegralCheck:
    """Integral of f l_2k(f) - T_2k(grad f, grad f) over a closed chart; vanishes."""
    _require_closed(chart)
    _check_order(chart, k, strict=True)
    tol = TOLERANCES["geometry_fd"] if tol is None else tol

    def pieces(u):
        frame = frame_at(chart, u)
        T = lovelock_at(chart, u, k, frame)
        grad = gradient_at(chart, u, f, frame)
        energy = float(grad @ T.as_matrix() @ grad)
        quadratic = f.value(frame.u) * ell2k_at(chart, u, f, k, frame)
        return (quadratic - energy) * frame.volume_density, energy * frame.volume_density

    rule = chart.quadrature(grid)
    values = run_sweep(rule.points, pieces, f"quadratic l_{2 * k}", _workers(False, workers))
    value = rule.integrate([v for v, _ in values])
    scale = rule.integrate([e for _, e in values])
    return IntegralCheck(f"quadratic form of l_{2 * k}({f.name})", value, scale, tol)
