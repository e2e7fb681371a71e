"""Experiment reports: JSON serialization and versioned CSV tables."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CSV_VERSION = 1


@dataclass(frozen=True)
class Check:
    """One machine-checkable invariant."""

    name: str
    passed: bool
    value: object = None
    tolerance: object = None
    detail: str = ""

    def line(self, experiment: str) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {experiment}/{self.name} value={_fmt(self.value)} tol={_fmt(self.tolerance)}"


@dataclass
class Table:
    name: str
    columns: list
    rows: list = field(default_factory=list)

    def add(self, *row) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} fields, table {self.name!r} has {len(self.columns)}")
        self.rows.append(list(row))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# anisoreg-{self.name} v{CSV_VERSION}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_cell(v) for v in row])
        return buf.getvalue()


@dataclass
class ExperimentReport:
    name: str
    config: dict
    version: str
    measured: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    tables: list = field(default_factory=list)
    figures: dict = field(default_factory=dict)  # kind -> {filename: svg text}
    wall_time: float = 0.0
    tag: str = ""  # file prefix; differs from name when an experiment runs twice

    @property
    def prefix(self) -> str:
        return self.tag or self.name

    def check(self, name: str, passed, value=None, tolerance=None, detail: str = "") -> bool:
        passed = bool(passed)
        self.checks.append(Check(name, passed, value, tolerance, detail))
        return passed

    def table(self, name: str, columns: list) -> Table:
        t = Table(name, list(columns))
        self.tables.append(t)
        return t

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def first_failure(self) -> Check | None:
        return next((c for c in self.checks if not c.passed), None)

    def lines(self) -> list:
        return [c.line(self.name) for c in self.checks]

    def to_dict(self) -> dict:
        """Deterministic content only; wall time lives in a separate sidecar."""
        return {
            "name": self.name,
            "version": self.version,
            "config": sanitize(self.config),
            "measured": sanitize(self.measured),
            "checks": [
                {
                    "name": c.name,
                    "passed": c.passed,
                    "value": sanitize(c.value),
                    "tolerance": sanitize(c.tolerance),
                    "detail": c.detail,
                }
                for c in self.checks
            ],
            "passed": self.passed,
            "tables": sorted(f"{self.prefix}-{t.name}.csv" for t in self.tables),
            "figures": sorted(f"{self.prefix}-{n}" for files in self.figures.values() for n in files),
        }


def sanitize(x):
    """JSON-safe plain data; non-finite floats become strings."""
    if isinstance(x, dict):
        return {str(k): sanitize(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [sanitize(v) for v in x]
    if isinstance(x, np.ndarray):
        return sanitize(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return x


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6g}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if v is None:
        return "-"
    return str(v)


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(_cell(x) for x in v)
    return str(v)


def dumps(reports: list) -> str:
    from .. import __version__

    doc = {
        "tool": "anisoreg",
        "version": __version__,
        "experiments": [r.to_dict() for r in reports],
        "passed": all(r.passed for r in reports),
    }
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_outputs(reports: list, out: str | Path) -> list:
    """Write report.json, timing.json and per-experiment CSVs.  Returns written paths."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    path = out / "report.json"
    path.write_text(dumps(reports))
    written.append(path)
    timing = {r.prefix: round(r.wall_time, 3) for r in reports}
    path = out / "timing.json"
    path.write_text(json.dumps(timing, sort_keys=True, indent=2) + "\n")
    written.append(path)
    for r in reports:
        for t in r.tables:
            path = out / f"{r.prefix}-{t.name}.csv"
            path.write_text(t.to_csv())
            written.append(path)
    return written
