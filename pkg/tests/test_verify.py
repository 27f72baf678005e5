"""
Tests for verify.py.

Grids are kept small; every expected value is a closed form for the
catalog immersion involved.
"""

import numpy as np
import pytest
import sympy as sp

from gbcurv.charts import build_chart, sample_chart_on_grid
from gbcurv.errors import DegreeError, InvalidVariationError
from gbcurv.geometry import ScalarField, position_field
from gbcurv.verify import (
    VariationField,
    VariationResult,
    coordinate_harmonicity,
    first_variation,
    integral_zero_check,
    minimality_residual,
    pointwise_product_rule,
    quadratic_form_check,
    run_sweep,
    sample_points,
    sphere_eigen_check,
    total_gauss_bonnet,
    variation_field,
)


@pytest.fixture
def torus():
    return build_chart("flat_torus")


@pytest.fixture
def s2():
    return build_chart("round_sphere")


@pytest.fixture
def s3():
    return build_chart("round_sphere", {"n": 3})


@pytest.fixture
def torus3():
    return build_chart("flat_torus", {"r1": 1, "r2": 1, "r3": 1})


class TestRunSweep:
    """Test the sample sweep."""

    def test_order_preserved_in_parallel(self):
        """Results follow the input order whatever the completion order."""
        points = np.arange(20.0).reshape(10, 2)
        results = run_sweep(points, lambda u: u[0] + u[1], "sum", workers=4)
        assert results == [4.0 * i + 1.0 for i in range(10)]

    def test_value_errors_propagate(self):
        """Library errors pass through unchanged."""

        def fail(u):
            raise ValueError("bad sample")

        with pytest.raises(ValueError, match="bad sample"):
            run_sweep(np.zeros((2, 1)), fail, "fail")

    def test_other_errors_wrapped(self):
        """Unexpected errors become RuntimeError naming the point."""

        def fail(u):
            raise ZeroDivisionError("boom")

        with pytest.raises(RuntimeError, match="fail failed at u=") as info:
            run_sweep(np.ones((3, 1)), fail, "fail", workers=2)
        assert isinstance(info.value.__cause__, ZeroDivisionError)

    def test_sample_points_are_quadrature_nodes(self, torus):
        """Samples are the chart's product nodes."""
        assert sample_points(torus, 4).shape == (16, 2)


class TestMinimality:
    """Test minimality_residual."""

    def test_flat_torus_top_order(self, torus):
        """2k = n: h_3 vanishes, so the flat torus is 2-minimal."""
        report = minimality_residual(torus, 1, sample_points(torus, 4), deterministic=True)
        assert report.verdict == "minimal"
        assert report.max_residual == 0.0
        assert report.timings is None

    def test_flat_torus_not_minimal(self, torus):
        """k = 0: mean curvature sqrt(2), so some normal sees at least 1."""
        report = minimality_residual(torus, 0, sample_points(torus, 4))
        assert report.verdict == "not-minimal"
        assert 1.0 - 1e-9 <= report.max_residual <= np.sqrt(2) + 1e-9

    def test_flat_3_torus_top_order(self, torus3):
        """T^3 in R^6 has T_2 = 0, so h_3 vanishes for every normal."""
        report = minimality_residual(torus3, 1, sample_points(torus3, 4), deterministic=True)
        assert report.verdict == "minimal"
        assert report.max_residual < 1e-12
        assert report.samples[0].h == pytest.approx([1.0, 0.0], abs=1e-12)

    def test_flat_3_torus_not_minimal(self, torus3):
        """k = 0: the mean curvature of T^3 has length sqrt(3)."""
        report = minimality_residual(torus3, 0, sample_points(torus3, 4))
        assert report.verdict == "not-minimal"
        assert 1.0 - 1e-9 <= report.max_residual <= np.sqrt(3) + 1e-9

    def test_grid_torus(self, torus):
        """The sampled flat torus is 2-minimal as well."""
        grid = sample_chart_on_grid(torus, (8, 8))
        report = minimality_residual(grid, 1, sample_points(grid, 8))
        assert report.verdict == "minimal"
        assert report.tolerance == pytest.approx(1e-4)

    def test_s3_not_2_minimal(self, s3):
        """Unit S^3: |h_3| = 3."""
        report = minimality_residual(s3, 1, sample_points(s3, 3))
        assert report.verdict == "not-minimal"
        assert report.max_residual == pytest.approx(3.0)
        assert report.samples[0].h == pytest.approx([1.0, 3.0])
        assert report.samples[0].T_spectrum == pytest.approx([1.0, 1.0, 1.0])

    def test_kahler_graph_is_2_minimal(self):
        """Complex submanifolds are (2k)-minimal."""
        chart = build_chart("kahler_graph", {"extent": 0.5})
        report = minimality_residual(chart, 1, sample_points(chart, 2))
        assert report.verdict == "minimal"

    def test_dump_tensors(self, s2):
        """--dump-tensors records B, R and T per sample."""
        report = minimality_residual(s2, 0, sample_points(s2, 2), dump_tensors=True)
        tensors = report.samples[0].extra["tensors"]
        assert set(tensors) == {"B", "R", "T"}
        assert tensors["R"]["p"] == 2

    def test_invariants_label(self, s2):
        """check='invariants' labels the report."""
        report = minimality_residual(s2, 0, sample_points(s2, 2), check="invariants")
        assert report.check == "invariants"

    def test_order_too_large(self, s2):
        """2k > n raises DegreeError."""
        with pytest.raises(DegreeError):
            minimality_residual(s2, 2, sample_points(s2, 2))

    def test_empty_samples(self, s2):
        """An empty sample list raises ValueError."""
        with pytest.raises(ValueError, match="empty"):
            minimality_residual(s2, 0, np.zeros((0, 2)))


class TestHarmonicity:
    """Test coordinate_harmonicity."""

    def test_catenoid_is_harmonic(self):
        """A minimal surface has harmonic coordinates."""
        chart = build_chart("catenoid")
        report = coordinate_harmonicity(chart, 0, sample_points(chart, 4))
        assert report.verdict == "harmonic"
        assert report.extras["minimal"]
        assert report.extras["consistent"]

    def test_sphere_not_harmonic(self, s2):
        """Delta F = 2F on the unit S^2, matching sum h_1(N) N."""
        report = coordinate_harmonicity(s2, 0, sample_points(s2, 4))
        assert report.verdict == "not-harmonic"
        assert report.extras["identity_residual"] < 1e-8
        assert report.extras["consistent"]

    def test_needs_euclidean(self):
        """Sphere immersions are rejected."""
        chart = build_chart("clifford_torus")
        with pytest.raises(ValueError, match="Euclidean"):
            coordinate_harmonicity(chart, 0, sample_points(chart, 2))

    def test_needs_2k_below_n(self, s2):
        """2k = n is rejected."""
        with pytest.raises(DegreeError):
            coordinate_harmonicity(s2, 1, sample_points(s2, 2))


class TestSphereCheck:
    """Test sphere_eigen_check."""

    def test_equator(self):
        """Totally geodesic S^3: l_2 F = 3F."""
        chart = build_chart("equator", {"n": 3})
        report = sphere_eigen_check(chart, 1, sample_points(chart, 3))
        assert report.verdict == "minimal-in-sphere"
        assert report.extras["phi_min"] == pytest.approx(3.0)
        assert report.extras["phi_max"] == pytest.approx(3.0)

    def test_clifford_torus(self):
        """The Clifford torus is minimal in S^3: Delta F = 2F."""
        chart = build_chart("clifford_torus")
        report = sphere_eigen_check(chart, 0, sample_points(chart, 4))
        assert report.verdict == "minimal-in-sphere"
        assert report.extras["phi_max"] == pytest.approx(2.0)

    def test_small_sphere(self):
        """A small sphere is not minimal in S^3."""
        chart = build_chart("small_sphere_in_sphere", {"r": 0.5})
        report = sphere_eigen_check(chart, 0, sample_points(chart, 4))
        assert report.verdict == "not-minimal-in-sphere"

    def test_needs_sphere(self, s2):
        """Euclidean immersions are rejected."""
        with pytest.raises(ValueError, match="unit sphere"):
            sphere_eigen_check(s2, 0, sample_points(s2, 2))


class TestIntegrals:
    """Test total_gauss_bonnet and the integral identities."""

    def test_sphere_area(self, s2):
        """H_0 of the unit S^2 is its area."""
        assert total_gauss_bonnet(s2, 0, 10) == pytest.approx(4 * np.pi, rel=1e-6)

    def test_gauss_bonnet_sphere(self, s2):
        """H_2 of S^2 is 4 pi for any radius."""
        big = build_chart("round_sphere", {"r": 2.5})
        assert total_gauss_bonnet(s2, 1, 10) == pytest.approx(4 * np.pi, rel=1e-6)
        assert total_gauss_bonnet(big, 1, 10) == pytest.approx(4 * np.pi, rel=1e-6)

    def test_integral_of_laplacian(self, s2):
        """The integral of l_0 f vanishes on a closed chart."""
        f = position_field(s2, "x3**2 + x1*x2")
        check = integral_zero_check(s2, f, 0, 10)
        assert check.passed
        assert check.scale > 1.0

    def test_integral_of_ell2_on_s3(self, s3):
        """The integral of l_2 f over the unit S^3 vanishes."""
        f = position_field(s3, "x1**2 + x2*x4")
        check = integral_zero_check(s3, f, 1, 10)
        assert check.passed
        assert check.scale > 0.1

    def test_quadratic_form(self, s2):
        """Integral of f l_0 f - |grad f|^2 vanishes."""
        f = position_field(s2, "x3 + x1**2")
        check = quadratic_form_check(s2, f, 0, 10)
        assert check.passed
        assert check.to_dict()["passed"] is True

    def test_open_chart_rejected(self):
        """Integral identities need a closed chart."""
        chart = build_chart("catenoid")
        f = ScalarField.constant(1.0, 2)
        with pytest.raises(InvalidVariationError, match="not closed"):
            integral_zero_check(chart, f, 0, 4)

    def test_product_rule(self, s2):
        """l(fg) = f l(g) + g l(f) - 2 T(grad f, grad g) pointwise."""
        f = position_field(s2, "x1")
        g = position_field(s2, "x2*x3")
        assert pointwise_product_rule(s2, [0.8, 2.0], f, g, 0) == pytest.approx(0.0, abs=1e-9)


class TestFirstVariation:
    """Test first_variation."""

    def test_radial_s3(self, s3):
        """H_2(S^3(rho)) = 6 pi^2 rho, so H_2'(0) = 6 pi^2 = 3 vol."""
        field = variation_field(s3, "radial")
        result = first_variation(s3, field, 1, 24, deterministic=True)
        assert result.passed
        assert result.predicted == pytest.approx(6 * np.pi**2, rel=1e-6)
        assert result.richardson == pytest.approx(6 * np.pi**2, rel=1e-6)
        assert result.ratio == pytest.approx(1.0, abs=1e-6)

    def test_normal_field_on_flat_3_torus(self, torus3):
        """T_2 = 0 on T^3, so H_2 is stationary along any normal field."""
        u1, u2, u3 = torus3.symbols
        exprs = (
            sp.cos(u2) * sp.cos(u1),
            sp.cos(u2) * sp.sin(u1),
            sp.S.Zero,
            sp.S.Zero,
            sp.sin(u1) * sp.cos(u3),
            sp.sin(u1) * sp.sin(u3),
        )
        field = VariationField("normal", exprs)
        result = first_variation(torus3, field, 1, 8, deterministic=True)
        assert abs(result.predicted) < 1e-6
        assert abs(result.richardson) < 1e-6
        assert result.passed

    def test_tangent_flow_is_zero(self, s2):
        """Rotation along the azimuth leaves the area unchanged."""
        field = variation_field(s2, "tangent")
        result = first_variation(s2, field, 0, 8, deterministic=True)
        assert result.passed
        assert result.predicted == pytest.approx(0.0, abs=1e-9)

    def test_top_order_prediction_is_zero(self, s2):
        """2k = n: H_2 is a topological invariant."""
        field = variation_field(s2, "random", seed=4)
        result = first_variation(s2, field, 1, 12, deterministic=True)
        assert result.predicted == 0.0
        assert result.ratio is None
        assert result.passed

    def test_random_field_is_seeded(self, s2):
        """The same seed gives the same field."""
        assert variation_field(s2, "random", 3) == variation_field(s2, "random", 3)

    def test_open_chart(self):
        """A non-compact variation of an open chart is rejected."""
        chart = build_chart("catenoid")
        with pytest.raises(InvalidVariationError, match="not closed"):
            first_variation(chart, variation_field(chart, "radial"), 0, 4)

    def test_grid_chart(self, torus):
        """Grid immersions cannot be varied."""
        grid = sample_chart_on_grid(torus, (8, 8))
        with pytest.raises(InvalidVariationError):
            variation_field(grid, "radial")

    def test_unknown_field(self, s2):
        """Unknown kinds raise InvalidVariationError."""
        with pytest.raises(InvalidVariationError, match="Unknown"):
            variation_field(s2, "shear")

    def test_tangent_needs_periodic_axis(self):
        """Tangent flow needs a periodic axis."""
        with pytest.raises(InvalidVariationError, match="periodic"):
            variation_field(build_chart("kahler_graph"), "tangent")

    def test_result_fields(self):
        """difference and passed follow from the stored values."""
        result = VariationResult(1.0, 2.0, 2.0005, 1e-3, 1, 1e-3, "radial")
        assert result.difference == pytest.approx(5e-4)
        assert result.passed
        assert result.to_dict()["field"] == "radial"
