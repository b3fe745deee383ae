"""Check records and experiment reports (JSON + CSV)."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import write_field

SCHEMA_VERSION = 1
RELATIONS = ("le", "ge", "close", "rel_close", "true")


def _plain(v):
    """JSON-friendly copy of numpy scalars/arrays and nested containers."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        x = float(v)
        return x if math.isfinite(x) else repr(x)
    return v


@dataclass(frozen=True)
class CheckRecord:
    """One verified relation between two numbers.

    ``passed`` and ``ratio`` are derived from ``lhs``, ``rhs``,
    ``tolerance`` and ``relation``:

    * ``le``: lhs <= rhs + tolerance
    * ``ge``: lhs >= rhs - tolerance
    * ``close``: |lhs - rhs| <= tolerance
    * ``rel_close``: |lhs - rhs| <= tolerance * |rhs|
    * ``true``: lhs is nonzero (a flag); rhs is ignored
    """

    check: str
    lhs: float
    rhs: float
    tolerance: float = 0.0
    relation: str = "le"
    params: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else math.inf
        return float(self.lhs) / float(self.rhs)

    @property
    def passed(self) -> bool:
        l, r, t = float(self.lhs), float(self.rhs), float(self.tolerance)
        if not math.isfinite(l) and self.relation != "true":
            return False
        if self.relation == "le":
            return l <= r + t
        if self.relation == "ge":
            return l >= r - t
        if self.relation == "close":
            return abs(l - r) <= t
        if self.relation == "rel_close":
            return abs(l - r) <= t * abs(r)
        return bool(l)

    def to_dict(self) -> dict:
        return _plain({
            "check": self.check, "params": self.params, "lhs": self.lhs, "rhs": self.rhs,
            "ratio": self.ratio, "tolerance": self.tolerance, "relation": self.relation,
            "pass": self.passed, "details": self.details,
        })

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.check}: lhs={self.lhs:.6g} rhs={self.rhs:.6g} ({self.relation}, tol={self.tolerance:g})"


@dataclass
class ExperimentReport:
    """Records of one experiment run with its configuration echo."""

    experiment: str
    config: dict
    records: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)   # name -> (header, rows)
    timing: dict = field(default_factory=dict)
    fields: dict = field(default_factory=dict)   # name -> GridField, written as binary

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def add(self, rec: CheckRecord) -> CheckRecord:
        self.records.append(rec)
        return rec

    def table(self, name: str, header, rows) -> None:
        self.tables[name] = (list(header), [list(r) for r in rows])

    def to_dict(self) -> dict:
        from . import __version__
        return _plain({
            "schema_version": SCHEMA_VERSION,
            "version": __version__,
            "experiment": self.experiment,
            "config": self.config,
            "pass": self.passed,
            "checks": [r.to_dict() for r in self.records],
            "tables": sorted(self.tables),
            "timing": self.timing,
        })

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "report.json", "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        for name, (header, rows) in sorted(self.tables.items()):
            write_csv(out / f"{name}.csv", header, rows)
        for name, f in sorted(self.fields.items()):
            write_field(out / f"{name}.bin", f)
        return out / "report.json"


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows) -> None:
    """CSV with ``repr`` floats so identical inputs give identical bytes."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
