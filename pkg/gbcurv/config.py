"""
Configuration for gbcurv.

Declares the numerical tolerances, finite-difference defaults and built-in
immersion parameters used across the library, and reads the environment
(optionally via a .env file) for run-time settings. This module is the single
source of truth for those values.
"""

import os
from enum import Enum

from dotenv import load_dotenv

from gbcurv.logging_config import debug_enabled

# Load environment variables from .env file
load_dotenv()


class ScalarMode(str, Enum):
    """Scalar field a tensor context computes in."""

    FLOAT = "float"
    EXACT = "exact"


# Tolerances (relative for algebra, absolute for geometry)
TOLERANCES = {
    "algebra": 1e-9,
    "symmetric_oracle": 1e-8,
    "spaceform_round_trip": 1e-10,
    "definiteness": 1e-10,
    "geometry_fd": 1e-4,
    "geometry_analytic": 1e-8,
    "symmetry_fd": 1e-7,
    "symmetry_analytic": 1e-10,
    "frame": 1e-9,
    "gram_determinant": 1e-10,
    "on_sphere": 1e-10,
    "variation_abs": 1e-3,
    "variation_rel": 1e-2,
}

# Finite-difference step in parameter units
FD_STEP = 1e-3

# Time step of the first-variation centered difference
VARIATION_DT = 1e-3

# Largest number of parameter points a sweep evaluates before subsampling
MAX_SWEEP_SAMPLES = 2048

# Default grid points per axis
DEFAULT_GRID = 16

# Built-in immersions and their default parameters
CATALOG_DEFAULTS = {
    "round_sphere": {"n": 2, "r": 1.0},
    "small_sphere_in_sphere": {"n": 2, "r": 0.5},
    "equator": {"n": 2},
    "flat_torus": {"radii": [1.0, 1.0]},
    "clifford_torus": {},
    "catenoid": {"a": 1.0, "height": 1.0},
    "kahler_graph": {"extent": 1.0},
    "graph_of_polynomial": {"expr": "u1**2 + u2**2", "extent": 1.0},
}

# Variation fields understood by the first-variation check
VARIATION_FIELDS = ["radial", "tangent", "random"]

# CLI subcommands, mirroring the library modules
SUBCOMMANDS = [
    "identities",
    "symm",
    "invariants",
    "minimality",
    "harmonicity",
    "variation",
    "sphere-check",
]

# Columns of the per-(sample, normal) table written by --table
REPORT_COLUMNS = [
    "check",
    "immersion",
    "k",
    "sample",
    "u",
    "normal",
    "h_odd",
    "residual",
    "h",
    "T_min",
    "T_max",
]


def get_worker_count() -> int:
    """
    Get the number of sweep workers from the environment.

    Reads GBCURV_THREADS; falls back to the CPU count.

    Returns:
        Positive worker count

    Raises:
        ValueError: If GBCURV_THREADS is set but not a positive integer
    """
    raw = os.getenv("GBCURV_THREADS")
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1

    try:
        workers = int(raw)
    except ValueError as e:
        raise ValueError(
            f"GBCURV_THREADS must be a positive integer, got '{raw}'"
        ) from e

    if workers < 1:
        raise ValueError(f"GBCURV_THREADS must be a positive integer, got '{raw}'")
    return workers


def check_routes_enabled() -> bool:
    """
    Whether curvature invariants cross-check both of their formulas.

    Reads GBCURV_CHECK_ROUTES ("1"/"0"); defaults to on in debug mode.
    """
    raw = os.getenv("GBCURV_CHECK_ROUTES")
    if raw is None:
        return debug_enabled()
    return raw.strip() == "1"


def _parse_scalar(text: str) -> int | float | str:
    """Parse a CLI value as int, then float, then keep the string."""
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def parse_catalog_params(tokens: list[str]) -> dict:
    """
    Parse catalog parameters given as key=value tokens.

    Tokens may hold several comma-separated pairs ("r1=1,r2=1"); a piece
    without "=" extends the previous key into a list ("radii=1,1").

    Args:
        tokens: Raw tokens from the command line

    Returns:
        Dictionary of typed parameter values

    Raises:
        ValueError: If a token does not start with key=value
    """
    params: dict = {}
    last_key = None
    for token in tokens:
        for piece in token.split(","):
            piece = piece.strip()
            if not piece:
                continue
            if "=" in piece:
                key, value = piece.split("=", 1)
                key = key.strip()
                if not key:
                    raise ValueError(f"Malformed catalog parameter '{piece}'")
                params[key] = _parse_scalar(value.strip())
                last_key = key
            elif last_key is None:
                raise ValueError(f"Catalog parameter '{piece}' must be key=value")
            else:
                previous = params[last_key]
                if not isinstance(previous, list):
                    previous = [previous]
                previous.append(_parse_scalar(piece))
                params[last_key] = previous
    return params