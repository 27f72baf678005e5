"""
Pointwise geometry of an immersion chart.

frame_at turns the chart derivatives at a parameter point into a PointFrame:
induced metric, Christoffel symbols and orthonormal tangent/normal frames.
Everything handed to the double-form algebra is expressed in the orthonormal
tangent frame e_a = sum_i P[i, a] dF/du_i.

Sign conventions:
    B_N(x, y) = -<d^2F(x, y), N>     (outward unit sphere: B = +g)
    Hess(f_v) = -<B, v>  for f_v = <v, F>
    Laplacian = -c Hess              (Delta F = n F on the unit S^n)

Normals come from a complete QR factorization of the Jacobian, so their
order and orientation are deterministic but otherwise arbitrary; every
verdict built on them uses absolute values or orientation-free combinations.
"""

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import sympy as sp

from gbcurv.charts import Ambient
from gbcurv.config import FD_STEP, TOLERANCES
from gbcurv.curvature import (
    CurvatureTensor,
    LovelockTensor,
    ell2k_pointwise,
    gauss_equation,
    lovelock_tensor,
)
from gbcurv.double_form import SymBilinearForm
from gbcurv.errors import DegenerateImmersionError, DegreeError, OffSphereError
from gbcurv.logging_config import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class PointFrame:
    """Induced geometry of a chart at one parameter point."""

    u: np.ndarray
    position: np.ndarray
    jacobian: np.ndarray
    second_derivatives: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    metric: np.ndarray
    metric_inverse: np.ndarray
    christoffel: np.ndarray
    frame_change: np.ndarray
    ambient_curvature: float = 0.0

    @property
    def n(self) -> int:
        return self.jacobian.shape[1]

    @property
    def gram_determinant(self) -> float:
        return float(np.linalg.det(self.metric))

    @property
    def volume_density(self) -> float:
        """sqrt(det g) in the chart's coordinates."""
        return float(np.sqrt(self.gram_determinant))

    def to_orthonormal(self, coordinate_form: np.ndarray) -> np.ndarray:
        """Bilinear form in coordinates -> matrix in the orthonormal frame."""
        P = self.frame_change
        return P.T @ coordinate_form @ P

    def covector_to_orthonormal(self, differential: np.ndarray) -> np.ndarray:
        """Components of a gradient in the orthonormal frame."""
        return self.frame_change.T @ differential


def normalized_gram_determinant(metric: np.ndarray) -> float:
    """
    det of the Gram matrix with its columns scaled to unit length.

    Lies in [0, 1] and does not change when one coordinate is rescaled, so
    the shrinking columns of polar coordinates near their axes keep the
    value of the orthogonal directions; it is 0 when a column vanishes or
    the columns become dependent.
    """
    norms = np.sqrt(np.clip(np.diag(metric), 0.0, None))
    if norms.min() <= TOLERANCES["gram_determinant"] * norms.max():
        return 0.0
    return float(np.linalg.det(metric / np.outer(norms, norms)))


def frame_at(chart, u) -> PointFrame:
    """
    Induced metric, Christoffel symbols and orthonormal frames at u.

    Args:
        chart: ImmersionChart or GridChart
        u: Parameter point

    Returns:
        PointFrame at u

    Raises:
        DegenerateImmersionError: If the normalized Gram determinant falls below tolerance
        OffSphereError: If a sphere immersion leaves the unit sphere at u
    """
    u = np.asarray(u, dtype=np.float64)
    position = chart.position(u)
    J = chart.jacobian(u)
    H = chart.hessian(u)
    n = chart.n

    metric = J.T @ J
    det = normalized_gram_determinant(metric)
    if det < TOLERANCES["gram_determinant"]:
        raise DegenerateImmersionError(u, det)

    if chart.ambient == Ambient.SPHERE:
        radius = float(np.linalg.norm(position))
        if abs(radius - 1.0) > TOLERANCES["on_sphere"]:
            raise OffSphereError(
                f"Chart '{chart.name}' leaves the unit sphere at u={tuple(u)} "
                f"(|F| = {radius:.12f})"
            )
        basis = np.column_stack([J, position])
        skip = n + 1
    else:
        basis = J
        skip = n

    Q, upper = np.linalg.qr(basis, mode="complete")
    frame_change = np.linalg.inv(upper[:n, :n])
    tangent = (J @ frame_change).T
    normal = Q[:, skip:].T

    metric_inverse = np.linalg.inv(metric)
    lowered = np.einsum("al,aij->lij", J, H)
    christoffel = np.einsum("kl,lij->kij", metric_inverse, lowered)

    return PointFrame(
        u=u,
        position=position,
        jacobian=J,
        second_derivatives=H,
        tangent=tangent,
        normal=normal,
        metric=metric,
        metric_inverse=metric_inverse,
        christoffel=christoffel,
        frame_change=frame_change,
        ambient_curvature=chart.ambient_curvature,
    )


def second_fundamental_forms(chart, u, frame: PointFrame | None = None) -> list:
    """
    B_a(x, y) = -<d^2F(x, y), N_a> for each normal N_a, in the orthonormal frame.

    For sphere immersions the normals are tangent to the sphere, so B is the
    second fundamental form inside the sphere.
    """
    frame = frame or frame_at(chart, u)
    forms = []
    for N in frame.normal:
        coordinate_form = -np.einsum("aij,a->ij", frame.second_derivatives, N)
        forms.append(SymBilinearForm.from_matrix(frame.to_orthonormal(coordinate_form)))
    return forms


def riemann_at(chart, u, frame: PointFrame | None = None) -> CurvatureTensor:
    """Intrinsic curvature through the Gauss equation of the chart's ambient space."""
    frame = frame or frame_at(chart, u)
    Bs = second_fundamental_forms(chart, u, frame)
    return gauss_equation(Bs, frame.ambient_curvature, n=chart.n)


# ============================================================================
# Scalar fields
# ============================================================================


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Function on the parameter box with its coordinate gradient and Hessian."""

    name: str
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def from_expression(cls, expr, symbols, name: str | None = None) -> "ScalarField":
        """Analytic derivatives of a sympy expression (or string) in the symbols."""
        expr = sp.sympify(expr, locals={str(s): s for s in symbols})
        n = len(symbols)
        grad = [sp.diff(expr, s) for s in symbols]
        hess = [sp.diff(expr, a, b) for a in symbols for b in symbols]
        f = sp.lambdify(symbols, expr, "numpy")
        df = sp.lambdify(symbols, grad, "numpy")
        d2f = sp.lambdify(symbols, hess, "numpy")
        return cls(
            name or str(expr),
            lambda u: float(f(*np.asarray(u, dtype=np.float64))),
            lambda u: np.asarray(df(*np.asarray(u, dtype=np.float64)), dtype=np.float64),
            lambda u: np.asarray(
                d2f(*np.asarray(u, dtype=np.float64)), dtype=np.float64
            ).reshape(n, n),
        )

    @classmethod
    def from_callable(
        cls, fn: Callable[[np.ndarray], float], n: int, step: float = FD_STEP,
        name: str = "f",
    ) -> "ScalarField":
        """Central-difference derivatives of a plain function of u."""
        unit = np.eye(n) * step

        def gradient(u):
            u = np.asarray(u, dtype=np.float64)
            return np.array(
                [(fn(u + unit[i]) - fn(u - unit[i])) / (2 * step) for i in range(n)]
            )

        def hessian(u):
            u = np.asarray(u, dtype=np.float64)
            result = np.zeros((n, n))
            center = fn(u)
            for i in range(n):
                result[i, i] = (fn(u + unit[i]) - 2 * center + fn(u - unit[i])) / step**2
                for j in range(i + 1, n):
                    result[i, j] = result[j, i] = (
                        fn(u + unit[i] + unit[j])
                        - fn(u + unit[i] - unit[j])
                        - fn(u - unit[i] + unit[j])
                        + fn(u - unit[i] - unit[j])
                    ) / (4 * step**2)
            return result

        return cls(name, lambda u: float(fn(np.asarray(u, dtype=np.float64))), gradient, hessian)

    @classmethod
    def constant(cls, value: float, n: int) -> "ScalarField":
        return cls(
            f"{value:g}",
            lambda u: float(value),
            lambda u: np.zeros(n),
            lambda u: np.zeros((n, n)),
        )

    def product(self, other: "ScalarField") -> "ScalarField":
        """f*g with the Leibniz rule applied to the derivatives."""

        def hessian(u):
            df, dg = self.gradient(u), other.gradient(u)
            return (
                self.value(u) * other.hessian(u)
                + other.value(u) * self.hessian(u)
                + np.outer(df, dg)
                + np.outer(dg, df)
            )

        return ScalarField(
            f"({self.name})*({other.name})",
            lambda u: self.value(u) * other.value(u),
            lambda u: self.value(u) * other.gradient(u) + other.value(u) * self.gradient(u),
            hessian,
        )


def coordinate_field(chart, v) -> ScalarField:
    """f_v = <v, F> with derivatives taken from the chart."""
    v = np.asarray(v, dtype=np.float64)
    return ScalarField(
        "<v,F>",
        lambda u: float(v @ chart.position(u)),
        lambda u: chart.jacobian(u).T @ v,
        lambda u: np.einsum("aij,a->ij", chart.hessian(u), v),
    )


def position_field(chart, expr, name: str | None = None) -> ScalarField:
    """
    Field given as an expression in the ambient coordinates x1..xN.

    Restricted to the immersion it is smooth on closed charts, including
    across the seams of periodic axes.
    """
    xs = sp.symbols(f"x1:{chart.ambient_dim + 1}", real=True)
    ambient_expr = sp.sympify(expr, locals={str(x): x for x in xs})
    pulled = ambient_expr.subs(dict(zip(xs, chart.exprs)), simultaneous=True)
    return ScalarField.from_expression(pulled, chart.symbols, name or str(ambient_expr))


# ============================================================================
# Hessians and generalized Laplacians
# ============================================================================


def _covariant_hessian(frame: PointFrame, d1: np.ndarray, d2: np.ndarray) -> np.ndarray:
    """Coordinate Hessian minus the Christoffel term, then to the orthonormal frame."""
    corrected = d2 - np.einsum("kij,k->ij", frame.christoffel, d1)
    return frame.to_orthonormal(corrected)


def hessian_at(chart, u, f: ScalarField, frame: PointFrame | None = None) -> SymBilinearForm:
    """
    Riemannian Hessian of f at u in the orthonormal tangent frame.

    d^2f/du_i du_j - Gamma^k_ij df/du_k, pulled through the frame change.
    """
    frame = frame or frame_at(chart, u)
    return SymBilinearForm.from_matrix(
        _covariant_hessian(frame, f.gradient(frame.u), f.hessian(frame.u))
    )


def gradient_at(chart, u, f: ScalarField, frame: PointFrame | None = None) -> np.ndarray:
    """Tangent gradient of f at u, components in the orthonormal frame."""
    frame = frame or frame_at(chart, u)
    return frame.covector_to_orthonormal(f.gradient(frame.u))


def coordinate_hessians(frame: PointFrame) -> np.ndarray:
    """Hessians of the ambient coordinate functions F_a, shape (N, n, n)."""
    return np.array(
        [
            _covariant_hessian(frame, frame.jacobian[a], frame.second_derivatives[a])
            for a in range(frame.jacobian.shape[0])
        ]
    )


def lovelock_at(chart, u, k: int, frame: PointFrame | None = None) -> LovelockTensor:
    """T_2k of the induced metric at u; requires 2k < n."""
    if k < 0 or 2 * k >= chart.n:
        raise DegreeError(f"Order 2k={2 * k} must satisfy 0 <= 2k < {chart.n}")
    return lovelock_tensor(riemann_at(chart, u, frame), k)


def ell2k_at(chart, u, f: ScalarField, k: int, frame: PointFrame | None = None) -> float:
    """
    Generalized Laplacian l_2k(f) = -<T_2k, Hess f> at u.

    Raises:
        DegreeError: If 2k >= n
    """
    frame = frame or frame_at(chart, u)
    T = lovelock_at(chart, u, k, frame)
    return float(ell2k_pointwise(T, hessian_at(chart, u, f, frame)))


def ell2k_of_position(frame: PointFrame, T: LovelockTensor) -> np.ndarray:
    """l_2k applied to every ambient coordinate function, a vector in R^N."""
    return np.array(
        [
            float(ell2k_pointwise(T, SymBilinearForm.from_matrix(hess)))
            for hess in coordinate_hessians(frame)
        ]
    )
