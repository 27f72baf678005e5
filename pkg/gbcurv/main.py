"""
Command-line front end.

    gbcurv identities   [--n-min N] [--n-max N] [--trials T] [--seed S] [--exact]
    gbcurv symm         --B '[[1,0],[0,2]]' --k K [--exact]
    gbcurv invariants   --immersion NAME|PATH [key=value ...] --k K
    gbcurv minimality   --immersion NAME|PATH [key=value ...] --k K
    gbcurv harmonicity  --immersion NAME|PATH [key=value ...] --k K
    gbcurv sphere-check --immersion NAME|PATH [key=value ...] --k K
    gbcurv variation    --immersion NAME [key=value ...] --field radial --k K

Every command writes a JSON document to stdout (or --out). Exit codes:
0 success, 1 failed identity/check or degenerate immersion, 2 usage error.
"""

import argparse
import json
import sys
from collections.abc import Sequence
from fractions import Fraction

import numpy as np

from gbcurv.charts import ImmersionChart, resolve_immersion
from gbcurv.config import (
    DEFAULT_GRID,
    FD_STEP,
    VARIATION_DT,
    VARIATION_FIELDS,
    ScalarMode,
    parse_catalog_params,
)
from gbcurv.double_form import SymBilinearForm
from gbcurv.errors import CatalogError, DegenerateImmersionError, RouteMismatchError
from gbcurv.identities import run_identities
from gbcurv.logging_config import get_logger
from gbcurv.report import RunConfig, write_report, write_table
from gbcurv.symm_functions import newton_transform, symmetric_function_table
from gbcurv.verify import (
    coordinate_harmonicity,
    first_variation,
    minimality_residual,
    sample_points,
    sphere_eigen_check,
    variation_field,
)

logger = get_logger(__name__)


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="Seed of random instances")
    common.add_argument("--tol", type=float, default=None, help="Tolerance override")
    common.add_argument(
        "--deterministic",
        action="store_true",
        help="Single worker, no timings; byte-identical reports",
    )
    common.add_argument("--out", default=None, help="Write the JSON report here")
    return common


def _immersion_parser() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        "--immersion",
        nargs="+",
        required=True,
        metavar="NAME|PATH [key=value ...]",
        help="Catalog immersion with parameters, or a grid immersion JSON file",
    )
    parent.add_argument("--k", type=int, default=1, help="Half order k of h_2k")
    parent.add_argument(
        "--grid", type=int, default=DEFAULT_GRID, help="Quadrature nodes per axis"
    )
    parent.add_argument(
        "--fd-step",
        type=float,
        default=None,
        help=f"Use central differences of this step (e.g. {FD_STEP})",
    )
    return parent


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per check."""
    parser = argparse.ArgumentParser(
        prog="gbcurv",
        description="Gauss-Bonnet curvatures, Einstein-Lovelock tensors and "
        "(2k)-minimality checks through the algebra of double forms",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()
    immersion = _immersion_parser()

    identities = subparsers.add_parser(
        "identities", parents=[common], help="Run the algebra certification suites"
    )
    identities.add_argument(
        "--n-min",
        type=int,
        default=None,
        help="Smallest dimension (default min(2, --n-max))",
    )
    identities.add_argument("--n-max", type=int, default=4, help="Largest dimension")
    identities.add_argument("--trials", type=int, default=20)
    identities.add_argument("--exact", action="store_true", help="Rational arithmetic")
    identities.add_argument(
        "--only", nargs="+", default=None, metavar="NAME", help="Run these identities"
    )

    symm = subparsers.add_parser(
        "symm", parents=[common], help="s_k and t_k of a symmetric matrix"
    )
    symm.add_argument("--B", required=True, help="Symmetric matrix as JSON")
    symm.add_argument("--k", type=int, required=True)
    symm.add_argument("--exact", action="store_true", help="Rational arithmetic")

    for name, text in (
        ("invariants", "h_2k table, T_2k spectrum and h_2k+1 per sample"),
        ("minimality", "(2k)-minimality verdict"),
        ("harmonicity", "l_2k of the coordinate functions"),
        ("sphere-check", "l_2k F = phi F for immersions into the unit sphere"),
    ):
        sub = subparsers.add_parser(name, parents=[common, immersion], help=text)
        sub.add_argument("--dump-tensors", action="store_true")
        sub.add_argument("--table", default=None, help="Write a CSV table here")

    variation = subparsers.add_parser(
        "variation", parents=[common, immersion], help="First variation of H_2k"
    )
    variation.add_argument("--field", choices=VARIATION_FIELDS, default="radial")
    variation.add_argument("--dt", type=float, default=VARIATION_DT)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """
    Build the run configuration of a parsed command line.

    Raises:
        ValueError: If a value is out of range or a parameter is malformed
    """
    target, params = None, {}
    if getattr(args, "immersion", None):
        target = args.immersion[0]
        params = parse_catalog_params(args.immersion[1:])

    n_max = getattr(args, "n_max", 4)
    n_min = getattr(args, "n_min", None)
    if n_min is None:
        n_min = min(2, n_max)

    return RunConfig(
        command=args.command,
        seed=args.seed,
        trials=getattr(args, "trials", 20),
        n_min=n_min,
        n_max=n_max,
        k=args.k if getattr(args, "k", None) is not None else 1,
        grid=getattr(args, "grid", DEFAULT_GRID),
        mode=ScalarMode.EXACT if getattr(args, "exact", False) else ScalarMode.FLOAT,
        tol=args.tol,
        immersion=target,
        params=params,
        variation=getattr(args, "field", "radial"),
        dt=getattr(args, "dt", VARIATION_DT),
        deterministic=args.deterministic,
        dump_tensors=getattr(args, "dump_tensors", False),
        out=args.out,
        table=getattr(args, "table", None),
    )


def _load_chart(config: RunConfig, fd_step: float | None):
    chart = resolve_immersion(config.immersion, config.params)
    if fd_step is not None:
        if not isinstance(chart, ImmersionChart):
            raise ValueError("--fd-step applies to catalog immersions only")
        chart = chart.finite_difference(fd_step)
    return chart


# ============================================================================
# Commands
# ============================================================================


def cmd_identities(config: RunConfig, only: list[str] | None = None) -> int:
    document = run_identities(config, only)
    write_report(document, config.out)
    return 0 if document["passed"] else 1


def _parse_matrix(text: str, mode: ScalarMode) -> np.ndarray:
    try:
        rows = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"--B is not valid JSON: {e}") from e
    if mode == ScalarMode.EXACT:
        return np.array([[Fraction(str(x)) for x in row] for row in rows], dtype=object)
    return np.asarray(rows, dtype=np.float64)


def cmd_symm(config: RunConfig, matrix_text: str) -> int:
    """s_k(B), t_k(B) and the full table s_0..s_n."""
    matrix = _parse_matrix(matrix_text, config.mode)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"--B must be a square matrix, got shape {matrix.shape}")
    if config.mode == ScalarMode.EXACT:
        symmetric = bool(np.all(matrix == matrix.T))
    else:
        symmetric = bool(np.allclose(matrix, matrix.T))
    if not symmetric:
        raise ValueError("--B must be symmetric")
    B = SymBilinearForm.from_matrix(matrix, config.mode)
    if config.k > B.n:
        raise ValueError(f"--k must satisfy k <= n = {B.n}, got {config.k}")

    table = symmetric_function_table(B)
    document = {
        "command": "symm",
        "config": config.to_dict(),
        "n": B.n,
        "k": config.k,
        "s_k": table[config.k],
        "t_k": newton_transform(B, config.k).as_matrix(),
        "s": list(table),
    }
    write_report(document, config.out)
    return 0


def _emit_check(config: RunConfig, chart, report) -> None:
    document = {"config": config.to_dict(), **report.to_dict()}
    write_report(document, config.out)
    if config.table:
        write_table(report, config.table)
    logger.info(
        f"{config.command} on '{chart.name}' (k={config.k}): {report.verdict}, "
        f"max residual {report.max_residual:.3e}"
    )


def cmd_minimality(config: RunConfig, fd_step: float | None = None) -> int:
    """
    (2k)-minimality verdict, also behind ``invariants``.

    A not-minimal verdict is a result and exits 0.
    """
    chart = _load_chart(config, fd_step)
    points = sample_points(chart, config.grid, config.seed)
    report = minimality_residual(
        chart,
        config.k,
        points,
        tol=config.tol,
        deterministic=config.deterministic,
        dump_tensors=config.dump_tensors,
        check=config.command,
    )
    _emit_check(config, chart, report)
    return 0


def cmd_check(config: RunConfig, fd_step: float | None = None) -> int:
    """harmonicity and sphere-check."""
    chart = _load_chart(config, fd_step)
    points = sample_points(chart, config.grid, config.seed)
    options = {"tol": config.tol, "deterministic": config.deterministic}

    if config.command == "harmonicity":
        report = coordinate_harmonicity(chart, config.k, points, **options)
    else:
        report = sphere_eigen_check(chart, config.k, points, **options)
    _emit_check(config, chart, report)

    if config.command == "harmonicity" and not report.extras["consistent"]:
        return 1
    return 0


def cmd_variation(config: RunConfig, fd_step: float | None = None) -> int:
    chart = _load_chart(config, fd_step)
    field = variation_field(chart, config.variation, config.seed)
    result = first_variation(
        chart,
        field,
        config.k,
        config.grid,
        config.dt,
        deterministic=config.deterministic,
    )
    document = {
        "command": "variation",
        "config": config.to_dict(),
        "immersion": chart.describe(),
        **result.to_dict(),
    }
    write_report(document, config.out)
    return 0 if result.passed else 1


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        config = config_from_args(args)
        if config.command == "identities":
            return cmd_identities(config, args.only)
        if config.command == "symm":
            return cmd_symm(config, args.B)
        if config.command == "variation":
            return cmd_variation(config, args.fd_step)
        if config.command in ("invariants", "minimality"):
            return cmd_minimality(config, args.fd_step)
        return cmd_check(config, args.fd_step)
    except (DegenerateImmersionError, RouteMismatchError) as e:
        logger.error(str(e))
        return 1
    except (CatalogError, ValueError) as e:
        message = e.args[0] if isinstance(e, CatalogError) and e.args else str(e)
        logger.error(message)
        print(f"gbcurv {args.command}: error: {message}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
