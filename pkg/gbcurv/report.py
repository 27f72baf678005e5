"""
Run configuration and machine-readable reports.

Reports are JSON documents. Floats are written with Python's shortest
round-trip repr, so a report read back with from_dict reproduces every value
bit for bit; exact scalars (fractions) are written as "num/den" strings.

InvariantReport.to_frame flattens a report into one row per
(sample, normal direction) for CSV export with pandas.
"""

import json
import sys
from dataclasses import asdict, dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path

import numpy as np
import pandas as pd

from gbcurv.config import REPORT_COLUMNS, TOLERANCES, ScalarMode
from gbcurv.logging_config import get_logger

logger = get_logger(__name__)

# Verdict words per check: (passes, fails)
VERDICTS = {
    "minimality": ("minimal", "not-minimal"),
    "invariants": ("minimal", "not-minimal"),
    "harmonicity": ("harmonic", "not-harmonic"),
    "sphere-check": ("minimal-in-sphere", "not-minimal-in-sphere"),
}


def jsonable(value):
    """Convert numpy and fraction values to plain JSON types."""
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else str(value)
    if isinstance(value, np.ndarray):
        return [jsonable(x) for x in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(x) for x in value]
    if isinstance(value, Enum):
        return value.value
    return value


@dataclass
class RunConfig:
    """Parameters of one CLI run; the seed determines every random instance."""

    command: str
    seed: int = 0
    trials: int = 20
    n_min: int = 2
    n_max: int = 4
    k: int = 1
    grid: int = 16
    mode: ScalarMode = ScalarMode.FLOAT
    tol: float | None = None
    immersion: str | None = None
    params: dict = field(default_factory=dict)
    variation: str = "radial"
    dt: float = 1e-3
    deterministic: bool = False
    dump_tensors: bool = False
    out: str | None = None
    table: str | None = None

    def __post_init__(self):
        if self.tol is not None and self.tol <= 0:
            raise ValueError(f"Tolerance must be positive, got {self.tol}")
        if self.trials < 1:
            raise ValueError(f"Trials must be at least 1, got {self.trials}")
        if self.n_max < 1:
            raise ValueError(f"--n-max must be at least 1, got {self.n_max}")
        if self.n_min < 1 or self.n_min > self.n_max:
            raise ValueError(
                f"Dimension range [{self.n_min}, {self.n_max}] is empty"
            )
        if self.grid < 1:
            raise ValueError(f"--grid must be at least 1, got {self.grid}")
        if self.k < 0:
            raise ValueError(f"--k must be non-negative, got {self.k}")
        if self.dt <= 0:
            raise ValueError(f"--dt must be positive, got {self.dt}")
        self.mode = ScalarMode(self.mode)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["mode"] = self.mode.value
        return jsonable(data)


@dataclass
class SampleRecord:
    """Invariants at one parameter point."""

    u: list[float]
    h: list[float]
    T_spectrum: list[float]
    h_odd: list[float]
    residual: float
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return jsonable(asdict(self))

    @classmethod
    def from_dict(cls, data: dict) -> "SampleRecord":
        return cls(
            u=list(data["u"]),
            h=list(data["h"]),
            T_spectrum=list(data["T_spectrum"]),
            h_odd=list(data["h_odd"]),
            residual=data["residual"],
            extra=dict(data.get("extra", {})),
        )


@dataclass
class InvariantReport:
    """Per-sample records plus the aggregate verdict of one geometric check."""

    check: str
    immersion: dict
    k: int
    samples: list[SampleRecord]
    max_residual: float
    tolerance: float
    verdict: str
    extras: dict = field(default_factory=dict)
    timings: dict | None = None

    @classmethod
    def build(
        cls,
        check: str,
        immersion: dict,
        k: int,
        samples: list[SampleRecord],
        tolerance: float,
        extras: dict | None = None,
        timings: dict | None = None,
    ) -> "InvariantReport":
        """Aggregate samples; the verdict passes iff max_residual < tolerance."""
        max_residual = max((s.residual for s in samples), default=0.0)
        passes, fails = VERDICTS[check]
        return cls(
            check=check,
            immersion=immersion,
            k=k,
            samples=samples,
            max_residual=float(max_residual),
            tolerance=float(tolerance),
            verdict=passes if max_residual < tolerance else fails,
            extras=extras or {},
            timings=timings,
        )

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tolerance

    def to_dict(self) -> dict:
        data = {
            "check": self.check,
            "immersion": self.immersion,
            "k": self.k,
            "samples": [s.to_dict() for s in self.samples],
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "extras": self.extras,
        }
        if self.timings is not None:
            data["timings"] = self.timings
        return jsonable(data)

    @classmethod
    def from_dict(cls, data: dict) -> "InvariantReport":
        try:
            return cls(
                check=data["check"],
                immersion=dict(data["immersion"]),
                k=int(data["k"]),
                samples=[SampleRecord.from_dict(s) for s in data["samples"]],
                max_residual=data["max_residual"],
                tolerance=data["tolerance"],
                verdict=data["verdict"],
                extras=dict(data.get("extras", {})),
                timings=data.get("timings"),
            )
        except KeyError as e:
            raise ValueError(f"Report JSON is missing key {e}") from e

    def to_frame(self) -> pd.DataFrame:
        """
        One row per (sample, normal direction).

        Raises:
            ValueError: If the assembled columns differ from config.REPORT_COLUMNS
        """
        rows = []
        for index, sample in enumerate(self.samples):
            normals = list(enumerate(sample.h_odd)) or [(None, float("nan"))]
            spectrum = sample.T_spectrum or [float("nan")]
            for normal, value in normals:
                rows.append(
                    {
                        "check": self.check,
                        "immersion": self.immersion.get("name"),
                        "k": self.k,
                        "sample": index,
                        "u": json.dumps(sample.u),
                        "normal": normal,
                        "h_odd": value,
                        "residual": sample.residual,
                        "h": json.dumps(sample.h),
                        "T_min": min(spectrum),
                        "T_max": max(spectrum),
                    }
                )
        frame = pd.DataFrame(rows, columns=REPORT_COLUMNS)

        expected, actual = set(REPORT_COLUMNS), set(frame.columns.tolist())
        if expected != actual:
            raise ValueError(
                f"Column mismatch for report table: missing {expected - actual}, "
                f"extra {actual - expected}"
            )
        return frame


def default_tolerance(chart) -> float:
    """Analytic charts are held to the analytic tolerance, others to the FD one."""
    return TOLERANCES["geometry_analytic" if chart.analytic else "geometry_fd"]


def dumps(document: dict) -> str:
    return json.dumps(jsonable(document), indent=2, sort_keys=True)


def write_report(document: dict, out: str | None = None) -> None:
    """Write a JSON document to ``out`` or stdout."""
    text = dumps(document)
    if out is None:
        sys.stdout.write(text + "\n")
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + "\n")
    logger.info(f"Wrote report to '{path}'")


def write_table(report: InvariantReport, path: str) -> None:
    """Export the report table as CSV."""
    frame = report.to_frame()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    logger.info(f"Wrote {len(frame)} rows to '{path}'")
