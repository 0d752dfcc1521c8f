"""CSV ingestion and report writing.

Survey-style micro-data comes in as a flat CSV with an outcome column
recorded at a top-code, optional continuous and categorical covariate
columns, optional weights, and an optional period column for repeated
cross sections. Each period becomes a capped tail sample aligned with
a design matrix, ready for fitting.

Weights are consumed as given; any rescaling a source prescribes is
the caller's responsibility. Outcomes are likewise assumed already
deflated to a common price basis.
"""
from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .estimators import CensoredSample, apply_top_code
from .regression import DesignMatrix, tail_members

__all__ = [
    "DatasetSpec",
    "PeriodData",
    "load_dataset",
    "atomic_write_text",
    "format_number",
    "rows_to_csv_text",
    "to_json_text",
]


@dataclass(frozen=True)
class DatasetSpec:
    """Where and how to read a top-coded dataset.

    Parameters
    ----------
    path : str
        CSV file with a header row, UTF-8, comma separated.
    outcome : str
        Column holding the (possibly top-coded) outcome.
    topcode : float or mapping, optional
        Cap value, or a mapping of period (as string) -> cap. Omitted
        means the data were never capped.
    k : float, optional
        Tail fraction; the upper floor(k * n) rows of each period are
        retained. Exactly one of k and y0 must be given.
    y0 : float or mapping, optional
        Explicit threshold (per period when a mapping); rows strictly
        above it are retained.
    continuous : sequence of str
        Covariate columns used as-is.
    dummies : mapping
        Categorical column -> reference level. Each level other than
        the reference becomes a 0/1 column named "column_level".
    weights : str, optional
        Column of nonnegative sampling weights.
    period : str, optional
        Column splitting the file into repeated cross sections;
        omitted treats the whole file as one period named "all".
    cap_tol : float
        Values within cap_tol of the cap count as capped, absorbing
        rounding in recorded caps.
    """

    path: str
    outcome: str
    topcode: object = None
    k: float | None = None
    y0: object = None
    continuous: tuple = ()
    dummies: dict = field(default_factory=dict)
    weights: str | None = None
    period: str | None = None
    cap_tol: float = 0.0

    def __post_init__(self):
        if (self.k is None) == (self.y0 is None):
            raise ValueError("supply exactly one of k and y0")
        if self.k is not None and not 0 < self.k < 1:
            raise ValueError("k must lie strictly inside (0, 1)")
        if self.cap_tol < 0:
            raise ValueError("cap_tol must be nonnegative")
        object.__setattr__(self, "continuous", tuple(self.continuous))
        object.__setattr__(self, "dummies", dict(self.dummies))


@dataclass(frozen=True, eq=False)
class PeriodData:
    """One period's retained tail, ready to fit."""

    period: object
    sample: CensoredSample
    design: DesignMatrix
    y_c: float | None
    n_total: int
    n_tail: int


def _per_period(value, period, what):
    if isinstance(value, dict):
        key = str(period)
        if key not in value:
            raise ValueError(f"no {what} given for period {key}")
        return float(value[key])
    return None if value is None else float(value)


def _numeric(df, col, what):
    vals = pd.to_numeric(df[col], errors="coerce").to_numpy(dtype=float)
    bad = int(np.count_nonzero(~np.isfinite(vals)))
    if bad:
        raise ValueError(
            f"{what} column {col!r} has {bad} missing or non-numeric "
            f"values out of {len(vals)} rows"
        )
    return vals


def load_dataset(spec: DatasetSpec) -> list:
    """Read, cap, and split a dataset into per-period tail samples.

    Dummy columns are expanded against the level sets of the full
    file, so designs stay aligned across periods; a level absent from
    some period simply yields a zero column there and surfaces as a
    rank problem at fit time.
    """
    df = pd.read_csv(spec.path)
    needed = [spec.outcome, *spec.continuous, *spec.dummies]
    if spec.weights:
        needed.append(spec.weights)
    if spec.period:
        needed.append(spec.period)
    missing = [c for c in needed if c not in df.columns]
    if missing:
        raise ValueError(f"missing columns: {', '.join(missing)}")

    outcome = _numeric(df, spec.outcome, "outcome")
    cont = {c: _numeric(df, c, "covariate") for c in spec.continuous}
    weights = _numeric(df, spec.weights, "weight") if spec.weights else None
    if weights is not None and np.any(weights < 0):
        raise ValueError("weights must be nonnegative")

    dummy_cols = {}
    for col, ref in spec.dummies.items():
        if df[col].isna().any():
            bad = int(df[col].isna().sum())
            raise ValueError(
                f"covariate column {col!r} has {bad} missing values "
                f"out of {len(df)} rows"
            )
        levels = sorted(df[col].astype(str).unique())
        ref = str(ref)
        if ref not in levels:
            raise ValueError(
                f"reference level {ref!r} not found in column {col!r}"
            )
        raw = df[col].astype(str).to_numpy()
        for lev in levels:
            if lev == ref:
                continue
            dummy_cols[f"{col}_{lev}"] = (raw == lev).astype(float)

    if spec.period:
        if df[spec.period].isna().any():
            raise ValueError(f"period column {spec.period!r} has missing values")
        period_vals = df[spec.period].to_numpy()
        periods = sorted(pd.unique(period_vals), key=str)
    else:
        period_vals = np.zeros(len(df))
        periods = [None]

    out = []
    for p in periods:
        rows = np.flatnonzero(period_vals == p) if p is not None else np.arange(len(df))
        label = "all" if p is None else p
        y = outcome[rows]
        cap = _per_period(spec.topcode, label, "top-code")
        if cap is not None:
            if cap <= 0:
                raise ValueError(f"period {label}: top-code must be positive")
            w, flag = apply_top_code(y, cap, spec.cap_tol)
        else:
            w, flag = y, np.zeros(y.size, dtype=bool)
        if spec.k is not None:
            try:
                y0, members = tail_members(w, spec.k)
            except ValueError as e:
                raise ValueError(f"period {label}: {e}") from None
        else:
            y0 = _per_period(spec.y0, label, "threshold")
            members = np.flatnonzero(w > y0)
            if members.size == 0:
                raise ValueError(
                    f"period {label}: 0 tail rows above threshold {y0:g} "
                    f"out of {y.size}"
                )
        named = {c: cont[c][rows][members] for c in spec.continuous}
        for name, colvals in dummy_cols.items():
            named[name] = colvals[rows][members]
        design = DesignMatrix.from_columns(named) if named else DesignMatrix(
            np.ones((members.size, 1)), ("const",)
        )
        try:
            sample = CensoredSample(
                w[members],
                flag[members],
                y0,
                cap if (cap is not None and cap > y0) else None,
                None if weights is None else weights[rows][members],
            )
        except ValueError as e:
            raise ValueError(f"period {label}: {e}") from None
        out.append(
            PeriodData(
                period=label,
                sample=sample,
                design=design,
                y_c=cap,
                n_total=int(y.size),
                n_tail=int(members.size),
            )
        )
    return out


def atomic_write_text(path, text: str):
    """Write a file via a temp name and rename, so readers never see
    a half-written file."""
    path = os.fspath(path)
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def format_number(v):
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6g}"
    return v


def rows_to_csv_text(rows, fields=None) -> str:
    """CSV text from dict rows; numbers get 6 significant digits."""
    if fields is None:
        if not rows:
            raise ValueError("fields are required when rows are empty")
        fields = list(rows[0])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for r in rows:
        writer.writerow([format_number(r[f]) for f in fields])
    return buf.getvalue()


def to_json_text(obj) -> str:
    """Deterministic JSON at full precision."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
