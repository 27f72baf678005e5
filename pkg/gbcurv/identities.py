"""
Certification suites for the double-form algebra.

Every identity is a check ``(ctx, rng) -> deviation`` on one random instance
in the tensor context ``ctx``; run_identities repeats it ``trials`` times for
each dimension in a range and records the largest deviation. Random instances
come from a generator seeded by (seed, n, identity position), so a seed fixes
every instance whatever the worker count.

In EXACT mode the instances are small-denominator rationals and every
deviation is exactly zero.

Groups:
- algebra: determinant law, g/c star duality, double star, inner product
  forms, Bianchi-form contractions, adjointness, commutativity
- symmetric: eigenvalue oracle, Newton triple, shift expansion, basis
  invariance
- curvature: dual routes, trace identity, space-form conversions, Kahler
  annihilation
"""

from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from math import factorial, prod

import numpy as np

from gbcurv.config import TOLERANCES, get_worker_count
from gbcurv.curvature import (
    CurvatureTensor,
    gauss_bonnet_h_contracted,
    gauss_bonnet_h_odd,
    gauss_bonnet_h_odd_pairing,
    gauss_bonnet_h_odd_star,
    gauss_bonnet_h_star,
    gauss_equation,
    hypersurface_minimality_polynomial,
    lovelock_tensor_contracted,
    lovelock_tensor_star,
    spaceform_h_from_s,
    spaceform_s_from_h,
)
from gbcurv.double_form import (
    SymBilinearForm,
    TensorContext,
    coerce_factor,
    component_inner_product,
    contract,
    contraction,
    deviation,
    duality_sign,
    exterior_product,
    hodge_star,
    inner_product,
    inverse_factorial,
    mult_by_metric,
    power,
    scalar_deviation,
    star_sign,
)
from gbcurv.logging_config import get_logger
from gbcurv.multiindex import enumerate_multiindices, permutation_sign
from gbcurv.report import RunConfig
from gbcurv.symm_functions import (
    elementary_symmetric,
    newton_transform,
    newton_transform_contracted,
    shift_expansion,
    symmetric_function_table,
)

logger = get_logger(__name__)

SHIFTS = (-2, -1, 0.5, 3)


@dataclass(frozen=True)
class Identity:
    """A named identity check and the dimensions it applies to."""

    name: str
    group: str
    check: Callable[[TensorContext, np.random.Generator], float]
    tolerance: str = "algebra"
    min_n: int = 1
    even_only: bool = False

    def applies(self, n: int) -> bool:
        return n >= self.min_n and not (self.even_only and n % 2)


@dataclass(frozen=True)
class IdentityResult:
    """Largest deviation of one identity over the trials at one dimension."""

    name: str
    group: str
    n: int
    trials: int
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "group": self.group,
            "n": self.n,
            "trials": self.trials,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


# ============================================================================
# Helpers
# ============================================================================


def _determinant(matrix: np.ndarray):
    """Leibniz expansion; exact on fraction entries."""
    size = matrix.shape[0]
    total = 0
    for perm in permutations(range(size)):
        total += permutation_sign(perm) * prod(matrix[i, perm[i]] for i in range(size))
    return total


def _degree(rng: np.random.Generator, low: int, high: int) -> int:
    """Uniform integer in [low, high]."""
    return int(rng.integers(low, high + 1))


def _exact_diagonal(ctx: TensorContext, rng: np.random.Generator) -> SymBilinearForm:
    entries = ctx.random_matrix(rng, 1, ctx.n)[0]
    matrix = np.zeros((ctx.n, ctx.n), dtype=object)
    matrix[:] = Fraction(0)
    for i, value in enumerate(entries):
        matrix[i, i] = value
    return ctx.bilinear(matrix)


def _orthogonal(ctx: TensorContext, rng: np.random.Generator) -> np.ndarray:
    """Random orthogonal matrix; a signed permutation in exact mode."""
    if ctx.exact:
        matrix = np.zeros((ctx.n, ctx.n), dtype=np.int64)
        signs = rng.choice([-1, 1], size=ctx.n)
        matrix[np.arange(ctx.n), rng.permutation(ctx.n)] = signs
        return matrix
    Q, _ = np.linalg.qr(rng.standard_normal((ctx.n, ctx.n)))
    return Q


def _complex_structure(n: int) -> np.ndarray:
    J = np.zeros((n, n), dtype=np.int64)
    for i in range(0, n, 2):
        J[i + 1, i] = 1
        J[i, i + 1] = -1
    return J


def _random_curvature(ctx: TensorContext, rng: np.random.Generator) -> CurvatureTensor:
    return CurvatureTensor.from_form(ctx.random_bianchi(rng, 2))


def _random_table(ctx: TensorContext, rng: np.random.Generator) -> list:
    return [coerce_factor(1, ctx.exact)] + list(ctx.random_matrix(rng, 1, ctx.n)[0])


def _curvature_constant(ctx: TensorContext):
    return Fraction(7, 10) if ctx.exact else 0.7


# ============================================================================
# Algebra identities
# ============================================================================


def determinant_law(ctx: TensorContext, rng: np.random.Generator) -> float:
    """B^k(e_I, e_J) = k! det B[I, J] for every pair of k-multi-indices."""
    B = ctx.random_symmetric(rng)
    k = _degree(rng, 1, ctx.n)
    P = power(B, k)
    indices = [index.entries for index in enumerate_multiindices(ctx.n, k)]
    matrix = B.coeffs
    worst = 0.0
    for a, rows in enumerate(indices):
        for b, cols in enumerate(indices):
            minor = matrix[np.ix_(rows, cols)]
            expected = factorial(k) * _determinant(minor)
            worst = max(worst, scalar_deviation(P.coeffs[a, b], expected))
    return worst


def metric_star_duality(ctx: TensorContext, rng: np.random.Generator) -> float:
    """g omega = s *c*omega and c omega = s *g*omega with s = (-1)^{n(p+q)}."""
    p, q = _degree(rng, 1, ctx.n - 1), _degree(rng, 1, ctx.n - 1)
    omega = ctx.random_form(rng, p, q)
    star = hodge_star(omega)
    sign = duality_sign(ctx.n, p, q)
    return max(
        deviation(mult_by_metric(omega), hodge_star(contraction(star)).scale(sign)),
        deviation(contraction(omega), hodge_star(mult_by_metric(star)).scale(sign)),
    )


def double_star(ctx: TensorContext, rng: np.random.Generator) -> float:
    """**omega = (-1)^{(p+q)(n-p-q)} omega."""
    p, q = _degree(rng, 0, ctx.n), _degree(rng, 0, ctx.n)
    omega = ctx.random_form(rng, p, q)
    return deviation(hodge_star(hodge_star(omega)), omega.scale(star_sign(ctx.n, p, q)))


def inner_product_forms(ctx: TensorContext, rng: np.random.Generator) -> float:
    """*(omega.*theta) = sign *((*omega).theta) = component sum."""
    p, q = _degree(rng, 0, ctx.n), _degree(rng, 0, ctx.n)
    omega, theta = ctx.random_form(rng, p, q), ctx.random_form(rng, p, q)
    defined = inner_product(omega, theta)
    swapped = star_sign(ctx.n, p, q) * hodge_star(
        exterior_product(hodge_star(omega), theta)
    ).value
    return max(
        scalar_deviation(defined, swapped),
        scalar_deviation(defined, component_inner_product(omega, theta)),
        scalar_deviation(defined, inner_product(theta, omega)),
    )


def bianchi_contractions(ctx: TensorContext, rng: np.random.Generator) -> float:
    """
    For a Bianchi (p,p)-form omega:

        *(g^{n-p} omega)/(n-p)! = c^p omega / p!
        *(g^{n-p-1} omega)/(n-p-1)! = (c^p omega / p!) g - c^{p-1} omega / (p-1)!
    """
    n, exact = ctx.n, ctx.exact
    p = _degree(rng, 1, min(2, n))
    omega = ctx.random_bianchi(rng, p)
    g = ctx.metric()
    c_p = contract(omega, p).value * inverse_factorial(p, exact)

    top = exterior_product(power(g, n - p), omega)
    worst = scalar_deviation(hodge_star(top).value * inverse_factorial(n - p, exact), c_p)
    if p + 1 <= n:
        left = hodge_star(exterior_product(power(g, n - p - 1), omega)).scale(
            inverse_factorial(n - p - 1, exact)
        )
        right = g.scale(c_p) - contract(omega, p - 1).scale(
            inverse_factorial(p - 1, exact)
        )
        worst = max(worst, deviation(left, right))
    return worst


def metric_adjointness(ctx: TensorContext, rng: np.random.Generator) -> float:
    """<g omega, theta> = <omega, c theta>."""
    p, q = _degree(rng, 0, ctx.n - 1), _degree(rng, 0, ctx.n - 1)
    omega = ctx.random_form(rng, p, q)
    theta = ctx.random_form(rng, p + 1, q + 1)
    return scalar_deviation(
        inner_product(mult_by_metric(omega), theta),
        inner_product(omega, contraction(theta)),
    )


def product_commutativity(ctx: TensorContext, rng: np.random.Generator) -> float:
    """B.C = C.B for symmetric bilinear forms; associativity when n >= 3."""
    A, B, C = (ctx.random_symmetric(rng) for _ in range(3))
    worst = deviation(exterior_product(B, C), exterior_product(C, B))
    if ctx.n >= 3:
        worst = max(
            worst,
            deviation(
                exterior_product(exterior_product(A, B), C),
                exterior_product(A, exterior_product(B, C)),
            ),
        )
    return worst


# ============================================================================
# Symmetric functions
# ============================================================================


def eigenvalue_oracle(ctx: TensorContext, rng: np.random.Generator) -> float:
    """
    s_k(B) against subset sums of eigenvalues.

    Exact mode uses a rational diagonal B, whose eigenvalues are its entries.
    """
    if ctx.exact:
        B = _exact_diagonal(ctx, rng)
        eigenvalues = [B.coeffs[i, i] for i in range(ctx.n)]
    else:
        B = ctx.random_symmetric(rng)
        eigenvalues = np.linalg.eigvalsh(B.as_matrix()).tolist()
    worst = 0.0
    for k in range(ctx.n + 1):
        oracle = sum(prod(subset) for subset in combinations(eigenvalues, k))
        worst = max(worst, scalar_deviation(elementary_symmetric(B, k), oracle))
    return worst


def newton_triple(ctx: TensorContext, rng: np.random.Generator) -> float:
    """<t_k, B> = (k+1) s_{k+1}, the contraction formula, c t_k = (n-k) s_k."""
    B = ctx.random_symmetric(rng)
    s = list(symmetric_function_table(B)) + [coerce_factor(0, ctx.exact)]
    worst = 0.0
    for k in range(ctx.n + 1):
        t = newton_transform(B, k)
        worst = max(
            worst,
            scalar_deviation(inner_product(t, B), (k + 1) * s[k + 1]),
            scalar_deviation(contraction(t).value, (ctx.n - k) * s[k]),
        )
        if 1 <= k < ctx.n:
            worst = max(worst, deviation(t, newton_transform_contracted(B, k)))
    return worst


def shift_identity(ctx: TensorContext, rng: np.random.Generator) -> float:
    """shift_expansion(B, lambda, k) = s_k(B + lambda g)."""
    B = ctx.random_symmetric(rng)
    worst = 0.0
    for shift in SHIFTS:
        shifted = SymBilinearForm.from_form(
            B + ctx.metric().scale(coerce_factor(shift, ctx.exact))
        )
        for k in range(ctx.n + 1):
            worst = max(
                worst,
                scalar_deviation(
                    shift_expansion(B, shift, k), elementary_symmetric(shifted, k)
                ),
            )
    return worst


def basis_invariance(ctx: TensorContext, rng: np.random.Generator) -> float:
    """s_k(Q^T B Q) = s_k(B) for orthogonal Q."""
    B = ctx.random_symmetric(rng)
    Q = _orthogonal(ctx, rng)
    rotated = ctx.bilinear(Q.T @ B.coeffs @ Q)
    return max(
        scalar_deviation(elementary_symmetric(B, k), elementary_symmetric(rotated, k))
        for k in range(ctx.n + 1)
    )


# ============================================================================
# Curvature invariants
# ============================================================================


def dual_routes(ctx: TensorContext, rng: np.random.Generator) -> float:
    """Star and contraction routes of h_2k, T_2k and h_2k+1 agree."""
    R = _random_curvature(ctx, rng)
    B = ctx.random_symmetric(rng)
    worst = 0.0
    for k in range(ctx.n // 2 + 1):
        worst = max(
            worst,
            scalar_deviation(gauss_bonnet_h_star(R, k), gauss_bonnet_h_contracted(R, k)),
            deviation(lovelock_tensor_star(R, k), lovelock_tensor_contracted(R, k)),
            scalar_deviation(
                gauss_bonnet_h_odd_star(R, B, k), gauss_bonnet_h_odd_pairing(R, B, k)
            ),
        )
    return worst


def trace_identity(ctx: TensorContext, rng: np.random.Generator) -> float:
    """c T_2k = (n - 2k) h_2k."""
    R = _random_curvature(ctx, rng)
    return max(
        scalar_deviation(
            contraction(lovelock_tensor_contracted(R, k)).value,
            (ctx.n - 2 * k) * gauss_bonnet_h_contracted(R, k),
        )
        for k in range(ctx.n // 2 + 1)
    )


def spaceform_round_trip(ctx: TensorContext, rng: np.random.Generator) -> float:
    """s_from_h(h_from_s(s)) = s on a random table."""
    s = _random_table(ctx, rng)
    c = _curvature_constant(ctx)
    h = [spaceform_h_from_s(s, c, ctx.n, k) for k in range(ctx.n // 2 + 1)]
    return max(
        scalar_deviation(spaceform_s_from_h(h, c, ctx.n, k), s[2 * k])
        for k in range(ctx.n // 2 + 1)
    )


def spaceform_cross_route(ctx: TensorContext, rng: np.random.Generator) -> float:
    """
    Space-form conversions against the Gauss equation route.

    h_2k and h_2k+1 of R = c g^2/2 + B^2/2 computed from R and from s_j(B).
    """
    B = ctx.random_symmetric(rng)
    c = _curvature_constant(ctx)
    R = gauss_equation([B], c)
    s = symmetric_function_table(B)
    worst = 0.0
    for k in range(ctx.n // 2 + 1):
        worst = max(
            worst,
            scalar_deviation(
                gauss_bonnet_h_contracted(R, k), spaceform_h_from_s(s, c, ctx.n, k)
            ),
        )
        if 2 * k < ctx.n:
            worst = max(
                worst,
                scalar_deviation(
                    gauss_bonnet_h_odd(R, B, k),
                    hypersurface_minimality_polynomial(s, c, ctx.n, k),
                ),
            )
    return worst


def kahler_annihilation(ctx: TensorContext, rng: np.random.Generator) -> float:
    """<T, B> = 0 for J-invariant T and B with B(Jx, y) = B(x, Jy)."""
    J = _complex_structure(ctx.n)
    S = ctx.random_matrix(rng, ctx.n, ctx.n)
    A = ctx.random_matrix(rng, ctx.n, ctx.n)
    S, A = S + S.T, A + A.T
    T = ctx.bilinear(S + J.T @ S @ J)
    B = ctx.bilinear(A - J.T @ A @ J)
    return scalar_deviation(inner_product(T, B), 0)


IDENTITIES = [
    Identity("determinant_law", "algebra", determinant_law),
    Identity("metric_star_duality", "algebra", metric_star_duality, min_n=2),
    Identity("double_star", "algebra", double_star),
    Identity("inner_product_forms", "algebra", inner_product_forms),
    Identity("bianchi_contractions", "algebra", bianchi_contractions),
    Identity("metric_adjointness", "algebra", metric_adjointness),
    Identity("product_commutativity", "algebra", product_commutativity, min_n=2),
    Identity("eigenvalue_oracle", "symmetric", eigenvalue_oracle, "symmetric_oracle"),
    Identity("newton_triple", "symmetric", newton_triple),
    Identity("shift_expansion", "symmetric", shift_identity),
    Identity("basis_invariance", "symmetric", basis_invariance, "symmetric_oracle"),
    Identity("dual_routes", "curvature", dual_routes, min_n=2),
    Identity("trace_identity", "curvature", trace_identity, min_n=2),
    Identity(
        "spaceform_round_trip", "curvature", spaceform_round_trip, "spaceform_round_trip"
    ),
    Identity("spaceform_cross_route", "curvature", spaceform_cross_route, min_n=2),
    Identity("kahler_annihilation", "curvature", kahler_annihilation, even_only=True),
]


# ============================================================================
# Runner
# ============================================================================


def run_identity(
    identity: Identity, ctx: TensorContext, trials: int, seed: int
) -> IdentityResult:
    """
    Run one identity ``trials`` times at the context's dimension.

    Raises:
        RuntimeError: If a trial fails with an unexpected error
    """
    position = IDENTITIES.index(identity) if identity in IDENTITIES else 0
    rng = np.random.default_rng([seed, ctx.n, position])
    worst = 0.0
    try:
        for _ in range(trials):
            worst = max(worst, float(identity.check(ctx, rng)))
    except Exception as e:
        raise RuntimeError(f"Identity '{identity.name}' failed on n={ctx.n}: {e}") from e

    result = IdentityResult(
        identity.name,
        identity.group,
        ctx.n,
        trials,
        worst,
        TOLERANCES[identity.tolerance],
    )
    logger.debug(f"{identity.name} n={ctx.n}: max deviation {worst:.3e}")
    return result


def run_identities(config: RunConfig, names: list[str] | None = None) -> dict:
    """
    Run the certification suites over [config.n_min, config.n_max].

    Args:
        config: Run configuration (seed, trials, dimension range, scalar mode)
        names: Restrict to these identities; all by default

    Returns:
        Report dictionary with one entry per (identity, n), ordered by
        identity then dimension, and an overall "passed" flag

    Raises:
        ValueError: If a requested identity name is unknown
    """
    selected = IDENTITIES
    if names:
        known = {identity.name for identity in IDENTITIES}
        unknown = set(names) - known
        if unknown:
            raise ValueError(f"Unknown identities: {sorted(unknown)}")
        selected = [identity for identity in IDENTITIES if identity.name in names]

    jobs = [
        (identity, n)
        for identity in selected
        for n in range(config.n_min, config.n_max + 1)
        if identity.applies(n)
    ]
    workers = 1 if config.deterministic else get_worker_count()
    logger.info(
        f"Running {len(jobs)} identity jobs over n in [{config.n_min}, {config.n_max}] "
        f"({config.mode.value} mode, {config.trials} trials)"
    )

    results: list[IdentityResult | None] = [None] * len(jobs)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {
            executor.submit(
                run_identity,
                identity,
                TensorContext(n, config.mode),
                config.trials,
                config.seed,
            ): index
            for index, (identity, n) in enumerate(jobs)
        }
        for future in as_completed(futures):
            results[futures[future]] = future.result()

    failed = [r for r in results if not r.passed]
    for result in failed:
        logger.warning(
            f"{result.name} n={result.n}: deviation {result.max_deviation:.3e} "
            f"exceeds {result.tolerance:.1e}"
        )
    logger.info(f"Completed identities: {len(results) - len(failed)}/{len(results)} passed")
    return {
        "command": "identities",
        "config": config.to_dict(),
        "results": [r.to_dict() for r in results],
        "max_deviation": max((r.max_deviation for r in results), default=0.0),
        "passed": not failed,
    }
