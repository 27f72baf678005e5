"""
Tests for curvature.py.

Uses the unit sphere (R = g^2/2), hypersurfaces R = B^2/2 and random
Bianchi forms. Route checks are forced on through GBCURV_CHECK_ROUTES.
"""

from fractions import Fraction
from math import factorial

import numpy as np
import numpy.testing as npt
import pytest

from gbcurv import curvature
from gbcurv.config import ScalarMode
from gbcurv.curvature import (
    CurvatureTensor,
    Definiteness,
    bianchi_defect,
    einstein_constant,
    ell2k_pointwise,
    ell2k_star,
    gauss_bonnet_h,
    gauss_bonnet_h_odd,
    gauss_bonnet_h_odd_star,
    gauss_bonnet_h_star,
    gauss_bonnet_table,
    gauss_equation,
    hypersurface_even_invariants,
    hypersurface_minimality_polynomial,
    is_definite,
    lovelock_tensor,
    lovelock_tensor_star,
    spaceform_h_from_s,
    spaceform_h_table,
    spaceform_s_from_h,
)
from gbcurv.double_form import SymBilinearForm, TensorContext, contraction, deviation, metric, zero
from gbcurv.errors import (
    BidegreeMismatchError,
    DegreeError,
    DimensionMismatchError,
    RouteMismatchError,
)
from gbcurv.symm_functions import elementary_symmetric, newton_transform, symmetric_function_table


@pytest.fixture(autouse=True)
def check_routes(monkeypatch):
    monkeypatch.setenv("GBCURV_CHECK_ROUTES", "1")


def unit_sphere(n, mode=ScalarMode.FLOAT):
    return gauss_equation([], 1, n=n, mode=mode)


def sphere_h(n, k):
    return factorial(n) / (2**k * factorial(n - 2 * k))


class TestGaussEquation:
    """Test gauss_equation."""

    def test_sphere_from_unit_form(self):
        """B = g in R^{n+1} gives the unit sphere tensor."""
        assert deviation(gauss_equation([metric(4)]), unit_sphere(4)) < 1e-12

    def test_curvature_tensor_bidegree(self):
        """CurvatureTensor rejects non-(2,2) forms."""
        with pytest.raises(BidegreeMismatchError):
            CurvatureTensor.from_form(metric(3))

    def test_needs_dimension_without_forms(self):
        """n is required when no forms are given."""
        with pytest.raises(DimensionMismatchError):
            gauss_equation([], 1)

    def test_mixed_dimensions(self):
        """Forms on different dimensions are rejected."""
        with pytest.raises(DimensionMismatchError):
            gauss_equation([metric(3), metric(4)])

    def test_products_satisfy_bianchi(self):
        """Sums of products of symmetric forms have zero Bianchi defect."""
        ctx = TensorContext(4)
        R = ctx.random_bianchi(np.random.default_rng(1), 2)
        assert bianchi_defect(R) < 1e-12

    def test_bianchi_defect_detects_violation(self):
        """A random symmetric (2,2) array is not a curvature tensor."""
        rng = np.random.default_rng(2)
        A = rng.uniform(-1, 1, size=(6, 6))
        R = CurvatureTensor(4, 2, 2, A + A.T)
        assert bianchi_defect(R) > 1e-3


class TestGaussBonnet:
    """Test h_2k."""

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_unit_sphere(self, n):
        """h_2k(S^n) = n!/(2^k (n-2k)!)."""
        table = gauss_bonnet_table(unit_sphere(n))
        npt.assert_allclose(table, [sphere_h(n, k) for k in range(n // 2 + 1)])

    def test_s4_h2(self):
        """Unit S^4: h_2 = 6, half the scalar curvature 12."""
        assert gauss_bonnet_h(unit_sphere(4), 1) == pytest.approx(6.0)

    def test_routes_agree_on_random(self):
        """Contraction and star routes agree on Bianchi forms."""
        R = TensorContext(5).random_bianchi(np.random.default_rng(3), 2)
        for k in range(3):
            assert gauss_bonnet_h(R, k) == pytest.approx(gauss_bonnet_h_star(R, k), abs=1e-9)

    def test_exact_sphere(self):
        """Exact mode gives integers as fractions."""
        assert gauss_bonnet_h(unit_sphere(4, ScalarMode.EXACT), 2) == Fraction(6)

    def test_order_too_large(self):
        """2k > n raises DegreeError."""
        with pytest.raises(DegreeError):
            gauss_bonnet_h(unit_sphere(3), 2)

    def test_route_mismatch_raises(self, monkeypatch):
        """A disagreeing star route raises RouteMismatchError."""
        monkeypatch.setattr(curvature, "gauss_bonnet_h_star", lambda R, k: 1e6)
        with pytest.raises(RouteMismatchError, match="h_2"):
            gauss_bonnet_h(unit_sphere(4), 1)

    def test_routes_skipped_when_disabled(self, monkeypatch):
        """With route checks off the star route is not evaluated."""
        monkeypatch.setenv("GBCURV_CHECK_ROUTES", "0")
        monkeypatch.setattr(curvature, "gauss_bonnet_h_star", lambda R, k: 1e6)
        assert gauss_bonnet_h(unit_sphere(4), 1) == pytest.approx(6.0)


class TestLovelockTensor:
    """Test T_2k."""

    def test_s4_t2(self):
        """Unit S^4: T_2 = 3g."""
        T = lovelock_tensor(unit_sphere(4), 1)
        assert T.order == 2
        assert einstein_constant(T) == pytest.approx(3.0)

    def test_s3_t2_is_metric(self):
        """Unit S^3: T_2 = g."""
        assert einstein_constant(lovelock_tensor(unit_sphere(3), 1)) == pytest.approx(1.0)

    def test_t0_is_metric(self):
        """T_0 = g."""
        assert deviation(lovelock_tensor(unit_sphere(3), 0), metric(3)) == 0.0

    def test_top_order_vanishes(self):
        """T_n = 0 for even n."""
        assert deviation(lovelock_tensor(unit_sphere(4), 2), zero(4, 1, 1)) < 1e-12

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_trace(self, n):
        """c T_2k = (n-2k) h_2k."""
        R = TensorContext(n).random_bianchi(np.random.default_rng(n), 2)
        for k in range(n // 2 + 1):
            trace = contraction(lovelock_tensor(R, k)).value
            assert trace == pytest.approx((n - 2 * k) * gauss_bonnet_h(R, k), abs=1e-9)

    def test_star_route(self):
        """The star route agrees with the contraction route."""
        R = TensorContext(5).random_bianchi(np.random.default_rng(5), 2)
        assert deviation(lovelock_tensor(R, 1), lovelock_tensor_star(R, 1)) < 1e-9


class TestOddGaussBonnet:
    """Test h_2k+1(N)."""

    def test_k0_is_trace(self):
        """h_1(N) = c B_N."""
        B = SymBilinearForm.from_matrix(np.diag([1.0, 2.0, 3.0]))
        assert gauss_bonnet_h_odd(unit_sphere(3), B, 0) == pytest.approx(6.0)

    def test_top_order_is_zero(self):
        """2k = n gives 0."""
        assert gauss_bonnet_h_odd(unit_sphere(2), metric(2), 1) == 0.0

    def test_sphere_in_euclidean_space(self):
        """S^3 in R^4: h_3 = <T_2, g> = 3."""
        assert gauss_bonnet_h_odd(unit_sphere(3), metric(3), 1) == pytest.approx(3.0)

    def test_linear_in_normal(self):
        """h_2k+1 is linear in B_N."""
        rng = np.random.default_rng(4)
        ctx = TensorContext(5)
        R = ctx.random_bianchi(rng, 2)
        B, C = ctx.random_symmetric(rng), ctx.random_symmetric(rng)
        combined = gauss_bonnet_h_odd(R, B + C.scale(2.0), 1)
        separate = gauss_bonnet_h_odd(R, B, 1) + 2 * gauss_bonnet_h_odd(R, C, 1)
        assert combined == pytest.approx(separate, abs=1e-9)

    def test_dimension_mismatch(self):
        """R and B_N must share n."""
        with pytest.raises(DimensionMismatchError):
            gauss_bonnet_h_odd(unit_sphere(3), metric(4), 1)

    def test_hypersurface_polynomial(self):
        """Hypersurface in R^{n+1}: h_2k+1 = (2k+1)!/2^k s_2k+1."""
        rng = np.random.default_rng(6)
        B = TensorContext(5).random_symmetric(rng)
        R = gauss_equation([B])
        s = symmetric_function_table(B)
        for k in range(3):
            assert gauss_bonnet_h_odd(R, B, k) == pytest.approx(
                hypersurface_minimality_polynomial(s, 0, 5, k), abs=1e-9
            )

    def test_hypersurface_polynomial_needs_2k_below_n(self):
        """2k = n is rejected."""
        with pytest.raises(DegreeError):
            hypersurface_minimality_polynomial([1, 0, 0, 0, 0], 0, 4, 2)


class TestSpaceForms:
    """Test the space-form conversions."""

    def test_flat_identity_form(self):
        """n=4, B=g, c=0: s_2 = 6 gives h_2 = 6."""
        assert spaceform_h_from_s([1, 4, 6, 4, 1], 0, 4, 1) == 6

    def test_totally_geodesic_sphere(self):
        """B = 0 in the unit sphere gives the sphere values."""
        h = spaceform_h_table([1, 0, 0, 0, 0, 0], 1, 5)
        assert h == [sphere_h(5, k) for k in range(3)]

    @pytest.mark.parametrize("c", [-1, 0, Fraction(1, 2), 2])
    def test_round_trip(self, c):
        """spaceform_s_from_h inverts spaceform_h_from_s."""
        s = [Fraction(1), Fraction(2), Fraction(-3, 4), Fraction(5), Fraction(1, 3), Fraction(7)]
        h = spaceform_h_table(s, c, 5)
        for k in range(3):
            assert spaceform_s_from_h(h, c, 5, k) == s[2 * k]

    def test_matches_gauss_equation(self):
        """Conversion agrees with h_2k of the intrinsic curvature."""
        rng = np.random.default_rng(8)
        B = TensorContext(4).random_symmetric(rng)
        R = gauss_equation([B], 1)
        s = symmetric_function_table(B)
        for k in range(3):
            assert float(spaceform_h_from_s(s, 1, 4, k)) == pytest.approx(
                gauss_bonnet_h(R, k), abs=1e-9
            )

    def test_short_table(self):
        """A short table raises DegreeError."""
        with pytest.raises(DegreeError):
            spaceform_h_from_s([1, 2], 0, 4, 1)

    def test_even_invariants(self):
        """s_2k and t_2k recovered from R = B^2/2."""
        rng = np.random.default_rng(9)
        B = TensorContext(4).random_symmetric(rng)
        invariants = hypersurface_even_invariants(B)
        for k, value in enumerate(invariants.s):
            assert value == pytest.approx(elementary_symmetric(B, 2 * k), abs=1e-9)
        for k, t in enumerate(invariants.t):
            assert deviation(t, newton_transform(B, 2 * k)) < 1e-9


class TestPointwiseHelpers:
    """Test l_2k, definiteness and Einstein constants."""

    def test_ell0_is_laplacian(self):
        """l_0 f = -trace Hess f."""
        hess = SymBilinearForm.from_matrix(np.diag([1.0, -2.0, 4.0]))
        assert ell2k_pointwise(metric(3), hess) == pytest.approx(-3.0)

    def test_ell_star_route(self):
        """l_2k through T_2k and through the star agree."""
        rng = np.random.default_rng(11)
        ctx = TensorContext(5)
        R = ctx.random_bianchi(rng, 2)
        hess = ctx.random_symmetric(rng)
        assert ell2k_pointwise(lovelock_tensor(R, 1), hess) == pytest.approx(
            ell2k_star(R, hess, 1), abs=1e-9
        )
        assert ell2k_star(R, hess, 1) == pytest.approx(-gauss_bonnet_h_odd_star(R, hess, 1))

    def test_ell_star_order(self):
        """l_2k needs 2k < n."""
        with pytest.raises(DegreeError):
            ell2k_star(unit_sphere(4), metric(4), 2)

    @pytest.mark.parametrize(
        "diagonal,expected",
        [
            ([1.0, 2.0], Definiteness.POSITIVE),
            ([-1.0, -0.5], Definiteness.NEGATIVE),
            ([1.0, -1.0], Definiteness.INDEFINITE),
            ([1.0, 0.0], Definiteness.DEGENERATE),
        ],
    )
    def test_is_definite(self, diagonal, expected):
        """Classification by eigenvalue signs."""
        assert is_definite(SymBilinearForm.from_matrix(np.diag(diagonal))) == expected

    def test_einstein_constant_none(self):
        """A non-multiple of g has no Einstein constant."""
        assert einstein_constant(SymBilinearForm.from_matrix(np.diag([1.0, 2.0]))) is None

    def test_einstein_constant_exact(self):
        """Exact forms give a fraction."""
        T = metric(3, ScalarMode.EXACT).scale(Fraction(2, 3))
        assert einstein_constant(T) == Fraction(2, 3)
