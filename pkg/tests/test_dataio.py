from __future__ import annotations

import json
import os

import numpy as np
import pytest

from toptail.dataio import (
    DatasetSpec,
    atomic_write_text,
    format_number,
    load_dataset,
    rows_to_csv_text,
    to_json_text,
)
from toptail.distributions import ParetoLaw, make_rng, pareto_sample


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


@pytest.fixture
def wages_csv(tmp_path):
    """Two years of capped earnings with one continuous and one
    categorical covariate."""
    rng = make_rng(60)
    rows = []
    for year, cap in ((1992, 300.0), (1993, 400.0)):
        y = pareto_sample(ParetoLaw(20.0, 2.2), 120, rng)
        for i in range(120):
            race = ("white", "black", "other")[i % 3]
            rows.append([
                year,
                f"{min(y[i], cap):.4f}",
                f"{20.0 + (i % 40):.1f}",
                race,
                f"{1.0 + (i % 5) * 0.25:.2f}",
            ])
    p = tmp_path / "wages.csv"
    write_csv(p, ["year", "wage", "age", "race", "wt"], rows)
    return p


def test_spec_validation(tmp_path):
    with pytest.raises(ValueError):
        DatasetSpec(path="x.csv", outcome="y")
    with pytest.raises(ValueError):
        DatasetSpec(path="x.csv", outcome="y", k=0.2, y0=1.0)
    with pytest.raises(ValueError):
        DatasetSpec(path="x.csv", outcome="y", k=1.5)
    with pytest.raises(ValueError):
        DatasetSpec(path="x.csv", outcome="y", k=0.2, cap_tol=-1.0)


def test_load_keeps_top_fraction(tmp_path):
    vals = np.arange(1.0, 101.0)
    write_csv(tmp_path / "d.csv", ["y"], [[v] for v in vals])
    periods = load_dataset(DatasetSpec(path=str(tmp_path / "d.csv"),
                                       outcome="y", k=0.20))
    assert len(periods) == 1
    p = periods[0]
    assert p.period == "all"
    assert p.n_total == 100
    assert p.n_tail == 20
    assert p.sample.y0 == 80.0
    assert p.sample.values.min() == 81.0
    assert p.design.columns == ("const",)


def test_load_applies_topcode_exactly(tmp_path):
    write_csv(tmp_path / "d.csv", ["y"],
              [[v] for v in (1.0, 2.0, 5.0, 7.5, 9.0, 12.0)])
    periods = load_dataset(DatasetSpec(path=str(tmp_path / "d.csv"),
                                       outcome="y", y0=2.0, topcode=9.0))
    s = periods[0].sample
    np.testing.assert_array_equal(np.sort(s.values), [5.0, 7.5, 9.0, 9.0])
    assert s.n_censored == 2
    assert s.y_c == 9.0
    # capped rows store the cap itself
    assert np.all(s.values[s.censored] == 9.0)


def test_load_cap_tolerance(tmp_path):
    write_csv(tmp_path / "d.csv", ["y"],
              [[v] for v in (1.0, 3.0, 8.996, 9.0)])
    periods = load_dataset(DatasetSpec(path=str(tmp_path / "d.csv"),
                                       outcome="y", y0=1.5, topcode=9.0,
                                       cap_tol=0.005))
    s = periods[0].sample
    assert s.n_censored == 2
    assert np.all(s.values[s.censored] == 9.0)


def test_load_expands_dummies(wages_csv):
    spec = DatasetSpec(path=str(wages_csv), outcome="wage", k=0.30,
                       continuous=("age",), dummies={"race": "white"},
                       weights="wt", period="year",
                       topcode={"1992": 300.0, "1993": 400.0})
    periods = load_dataset(spec)
    assert [p.period for p in periods] == [1992, 1993]
    for p in periods:
        assert p.design.columns == ("const", "age", "race_black", "race_other")
        assert p.design.binary_columns() == ("race_black", "race_other")
        dm = p.design.data
        assert set(np.unique(dm[:, 2])) <= {0.0, 1.0}
        assert p.sample.weights is not None
        assert p.n_tail == int(np.floor(0.30 * p.n_total))
    with pytest.raises(ValueError, match="reference level"):
        load_dataset(DatasetSpec(path=str(wages_csv), outcome="wage", k=0.3,
                                 dummies={"race": "green"}))


def test_load_per_period_caps_and_missing_entry(wages_csv):
    with pytest.raises(ValueError, match="no top-code given for period 1993"):
        load_dataset(DatasetSpec(path=str(wages_csv), outcome="wage", k=0.3,
                                 period="year", topcode={"1992": 300.0}))


def test_load_missing_columns(tmp_path):
    write_csv(tmp_path / "d.csv", ["y"], [[1.0], [2.0]])
    with pytest.raises(ValueError, match="missing columns: wage, age"):
        load_dataset(DatasetSpec(path=str(tmp_path / "d.csv"),
                                 outcome="wage", continuous=("age",), k=0.5))


def test_load_reports_bad_values(tmp_path):
    write_csv(tmp_path / "d.csv", ["y"],
              [[v] for v in ("1.0", "oops", "3.0", "NA", "5.0", "6.0")])
    with pytest.raises(ValueError, match="2 missing or non-numeric values out of 6"):
        load_dataset(DatasetSpec(path=str(tmp_path / "d.csv"),
                                 outcome="y", k=0.5))


def test_load_rejects_negative_weights(tmp_path):
    write_csv(tmp_path / "d.csv", ["y", "wt"],
              [[2.0, 1.0], [3.0, -0.5], [4.0, 1.0]])
    with pytest.raises(ValueError, match="weights must be nonnegative"):
        load_dataset(DatasetSpec(path=str(tmp_path / "d.csv"), outcome="y",
                                 weights="wt", y0=1.0))


def test_load_empty_tail_error(tmp_path):
    write_csv(tmp_path / "d.csv", ["y"], [[1.0], [2.0], [3.0]])
    with pytest.raises(ValueError, match="0 tail rows above threshold 50"):
        load_dataset(DatasetSpec(path=str(tmp_path / "d.csv"),
                                 outcome="y", y0=50.0))


def test_atomic_write(tmp_path):
    target = tmp_path / "out.txt"
    atomic_write_text(target, "first\n")
    assert target.read_text() == "first\n"
    atomic_write_text(target, "second\n")
    assert target.read_text() == "second\n"
    assert [f for f in os.listdir(tmp_path) if ".tmp" in f] == []


def test_format_number():
    assert format_number(1234567.89) == "1.23457e+06"
    assert format_number(0.25) == "0.25"
    assert format_number(7) == "7"
    assert format_number(True) == "True"
    assert format_number("name") == "name"
    assert format_number(np.float64(2.5)) == "2.5"


def test_rows_to_csv_text():
    rows = [{"a": 1, "b": 0.123456789}, {"a": 2, "b": 10.0}]
    text = rows_to_csv_text(rows)
    lines = text.splitlines()
    assert lines[0] == "a,b"
    assert lines[1] == "1,0.123457"
    assert lines[2] == "2,10"
    assert rows_to_csv_text([], fields=["x", "y"]) == "x,y\n"
    with pytest.raises(ValueError):
        rows_to_csv_text([])


def test_to_json_text_is_deterministic():
    text = to_json_text({"b": 1, "a": [1.5, None]})
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"b": 1, "a": [1.5, None]}
