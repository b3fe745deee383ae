import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracvar import __version__
from fracvar.grid import Grid, GridField, read_field
from fracvar.reports import SCHEMA_VERSION, CheckRecord, ExperimentReport, write_csv


@pytest.mark.parametrize("rel,lhs,rhs,tol,ok", [
    ("le", 1.0, 2.0, 0.0, True), ("le", 2.1, 2.0, 0.05, False),
    ("ge", 0.96, 1.0, 0.05, True), ("ge", 0.9, 1.0, 0.05, False),
    ("close", 1.01, 1.0, 0.02, True), ("close", 1.03, 1.0, 0.02, False),
    ("rel_close", 10.4, 10.0, 0.05, True), ("rel_close", 10.6, 10.0, 0.05, False),
    ("true", 1.0, 0.0, 0.0, True), ("true", 0.0, 1.0, 0.0, False),
])
def test_relations(rel, lhs, rhs, tol, ok):
    assert CheckRecord("c", lhs, rhs, tol, rel).passed is ok


def test_nan_never_passes():
    assert not CheckRecord("c", math.nan, 1.0, 1.0, "le").passed
    assert not CheckRecord("c", math.inf, math.inf, 0.0, "le").passed


def test_unknown_relation():
    with pytest.raises(ValueError):
        CheckRecord("c", 1.0, 1.0, 0.0, "lt")


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6), st.floats(0, 10))
def test_pass_is_derived(lhs, rhs, tol):
    rec = CheckRecord("c", lhs, rhs, tol, "le")
    d = rec.to_dict()
    assert d["pass"] == (lhs <= rhs + tol)
    assert set(d) == {"check", "params", "lhs", "rhs", "ratio", "tolerance", "relation", "pass", "details"}


def test_ratio_edge_cases():
    assert CheckRecord("c", 0.0, 0.0).ratio == 0.0
    assert CheckRecord("c", 1.0, 0.0).ratio == math.inf
    assert CheckRecord("c", 1.0, 4.0).ratio == 0.25


def test_report_write(tmp_path):
    rep = ExperimentReport("demo", {"n": np.int64(3)})
    rep.add(CheckRecord("a", np.float64(1.0), 2.0))
    rep.add(CheckRecord("b", 3.0, 2.0))
    rep.table("t", ["x", "y"], [(0.1, 2), (np.float64(0.3), np.int32(4))])
    g = Grid(1, 1.0, 16)
    rep.fields["f"] = GridField(g, np.zeros(16))
    rep.timing = {"wall_s": 0.5}
    rep.write(tmp_path)
    d = json.loads((tmp_path / "report.json").read_text())
    assert d["schema_version"] == SCHEMA_VERSION and d["version"] == __version__
    assert d["pass"] is False and [c["pass"] for c in d["checks"]] == [True, False]
    assert d["timing"] == {"wall_s": 0.5}
    assert (tmp_path / "t.csv").read_text() == "x,y\n0.1,2\n0.3,4\n"
    assert read_field(tmp_path / "f.bin").grid == g


def test_csv_is_deterministic(tmp_path):
    rows = [(1 / 3, 2.0**-40, "z")]
    write_csv(tmp_path / "a.csv", ["p", "q", "r"], rows)
    write_csv(tmp_path / "b.csv", ["p", "q", "r"], rows)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert float((tmp_path / "a.csv").read_text().splitlines()[1].split(",")[0]) == 1 / 3
