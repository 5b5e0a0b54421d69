"""Experiment reports with computed pass/fail and deterministic serialisation."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

TOL_ANALYTIC = 1e-9
TOL_OPTIMIZATION = 1e-6
N_SIGMA = 5.0

COMPARISONS = ("abs", "le", "ge", "sigma")
PROVENANCES = ("published", "oracle", "trivial")
CSV_COLUMNS = ("experiment", "check", "value", "target", "tolerance", "comparison", "sigma",
               "runs", "provenance", "passed")


def _plain(v):
    """Convert numpy scalars/arrays and tuples into JSON-friendly Python values."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (np.floating, float)):
        f = float(v)
        if math.isnan(f) or math.isinf(f):
            return str(f)
        return f
    return v


@dataclass(frozen=True)
class Check:
    """One numeric comparison; ``passed`` is computed, never supplied.

    ``abs``: |value - target| <= tolerance. ``le``/``ge``: one-sided with slack
    ``tolerance``. ``sigma``: |value - target| <= tolerance * sigma, where a
    zero sigma falls back to the analytic tolerance.
    """

    name: str
    value: float
    target: float
    tolerance: float
    comparison: str = "abs"
    provenance: str = "oracle"
    sigma: float | None = None
    runs: int | None = None

    def __post_init__(self):
        if self.comparison not in COMPARISONS:
            raise ValueError(f"unknown comparison {self.comparison!r}")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.comparison == "sigma" and (self.sigma is None or self.runs is None):
            raise ValueError("sampled checks need sigma and runs")

    @property
    def passed(self) -> bool:
        v, t, tol = float(self.value), float(self.target), float(self.tolerance)
        if self.comparison == "abs":
            return abs(v - t) <= tol
        if self.comparison == "le":
            return v <= t + tol
        if self.comparison == "ge":
            return v >= t - tol
        band = tol * float(self.sigma) if self.sigma > 0 else TOL_ANALYTIC
        return abs(v - t) <= band

    def to_dict(self) -> dict:
        return _plain({
            "name": self.name, "value": self.value, "target": self.target,
            "tolerance": self.tolerance, "comparison": self.comparison,
            "provenance": self.provenance, "sigma": self.sigma, "runs": self.runs,
            "passed": self.passed,
        })


@dataclass
class ExperimentReport:
    experiment: str
    parameters: dict
    seed: int
    rng: str
    analytic: dict = field(default_factory=dict)
    empirical: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    def add_empirical(self, name: str, value: float, runs: int, sigma: float):
        self.empirical[name] = {"value": value, "runs": runs, "sigma": sigma}

    def check(self, *args, **kwargs) -> Check:
        c = Check(*args, **kwargs)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "parameters": _plain(self.parameters),
            "seed": self.seed,
            "rng": self.rng,
            "analytic": _plain(self.analytic),
            "empirical": _plain(self.empirical),
            "checks": [c.to_dict() for c in self.checks],
            "passed": self.passed,
        }


def emit(report: ExperimentReport, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for c in report.checks:
            d = c.to_dict()
            writer.writerow([report.experiment] + [
                "" if d[k] is None else repr(d[k]) if isinstance(d[k], float) else d[k]
                for k in ("name", "value", "target", "tolerance", "comparison", "sigma", "runs",
                          "provenance", "passed")
            ])
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def report_from_json(text: str) -> dict:
    return json.loads(text)
