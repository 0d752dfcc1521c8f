"""Command line front end.

Four subcommands cover the full workflow on top-coded data:

    toptail fit      --input data.csv --outcome wage --topcode 2884 --k 0.2
    toptail effects  ... --u 0.15
    toptail impute   ... --switch 1.5
    toptail simulate --case 1 --n 5000 --reps 1000 --seed 7 --out-dir out

Every run either writes its complete set of output files or exits
nonzero with a one-line JSON error on stderr and writes nothing.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .dataio import (
    DatasetSpec,
    atomic_write_text,
    load_dataset,
    rows_to_csv_text,
    to_json_text,
)
from .effects import effects_table
from .impute import adjustment_factor_series, impute_topcoded
from .regression import FitOptions, fit_censored
from .simulate import (
    ImputationStudy,
    McCase,
    run_case,
    run_imputation_experiment,
    run_table,
    standard_case,
    summarize,
)

STAR_LEVELS = ((2.576, "***"), (1.960, "**"), (1.645, "*"))


def stars(t: float) -> str:
    """Two-sided significance marks at the 10/5/1% normal cutoffs."""
    for cut, mark in STAR_LEVELS:
        if abs(t) > cut:
            return mark
    return ""


class _Parser(argparse.ArgumentParser):
    # flag problems should produce the same JSON error contract as
    # everything else, not argparse's usage dump
    def error(self, message):
        raise ValueError(message)


def _data_flags(sp):
    sp.add_argument("--input", required=True, help="CSV file with a header row")
    sp.add_argument("--outcome", required=True, help="outcome column")
    sp.add_argument("--topcode", action="append", metavar="CAP|PERIOD=CAP",
                    help="cap value, repeatable as PERIOD=CAP")
    sp.add_argument("--k", type=float, default=None,
                    help="tail fraction retained above the selected threshold")
    sp.add_argument("--threshold", action="append", metavar="Y0|PERIOD=Y0",
                    help="explicit threshold instead of --k")
    sp.add_argument("--continuous", default="",
                    help="comma separated continuous covariate columns")
    sp.add_argument("--dummy", action="append", default=[],
                    metavar="COLUMN=REFERENCE",
                    help="categorical column with its omitted reference level")
    sp.add_argument("--weights", default=None, help="weight column")
    sp.add_argument("--period", default=None, help="period column")
    sp.add_argument("--cap-tol", type=float, default=0.0,
                    help="values within this of the cap count as capped")
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--max-iter", type=int, default=200)
    sp.add_argument("--out-dir", default=".")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="toptail",
                description="Tail-index regression for top-coded outcomes")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="per-period coefficient tables")
    _data_flags(f)
    f.set_defaults(func=cmd_fit)

    e = sub.add_parser("effects", help="covariate effects on extreme outcomes")
    _data_flags(e)
    e.add_argument("--u", type=float, default=0.15,
                   help="tail probability of the extreme event")
    e.add_argument("--dx", type=float, default=1.0,
                   help="increment for continuous covariates")
    e.set_defaults(func=cmd_effects)

    i = sub.add_parser("impute", help="impute capped outcomes")
    _data_flags(i)
    i.add_argument("--switch", type=float, default=1.5,
                   help="index below which the median imputation is used")
    i.add_argument("--group", action="append", default=[],
                   metavar="COLUMN=VALUE",
                   help="design column restriction for extra factor series")
    i.set_defaults(func=cmd_impute)

    s = sub.add_parser("simulate", help="run simulation designs")
    s.add_argument("--case", type=int, default=None,
                   help="standard design number, 1 to 6")
    s.add_argument("--n", type=int, default=None, help="sample size")
    s.add_argument("--reps", type=int, default=10000)
    s.add_argument("--quick", action="store_true",
                   help="cut every design to 1000 replications")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--config", default=None,
                   help="JSON file with 'cases' and 'imputation' lists")
    s.add_argument("--out-dir", default=".")
    s.set_defaults(func=cmd_simulate)
    return p


def _parse_keyed(items, flag):
    """['2884'] -> 2884.0; ['1992=1923', ...] -> {'1992': 1923.0, ...}."""
    if not items:
        return None
    mapping = {}
    plain = []
    for item in items:
        key, sep, val = item.partition("=")
        if sep:
            mapping[key.strip()] = float(val)
        else:
            plain.append(float(item))
    if mapping and plain:
        raise ValueError(f"{flag}: cannot mix plain and PERIOD=VALUE forms")
    if len(plain) > 1:
        raise ValueError(f"{flag}: more than one plain value")
    return mapping if mapping else plain[0]


def _dataset_spec(args) -> DatasetSpec:
    continuous = tuple(c for c in (s.strip() for s in args.continuous.split(",")) if c)
    dummies = {}
    for item in args.dummy:
        col, sep, ref = item.partition("=")
        if not sep:
            raise ValueError("--dummy takes COLUMN=REFERENCE")
        dummies[col.strip()] = ref.strip()
    return DatasetSpec(
        path=args.input,
        outcome=args.outcome,
        topcode=_parse_keyed(args.topcode, "--topcode"),
        k=args.k,
        y0=_parse_keyed(args.threshold, "--threshold"),
        continuous=continuous,
        dummies=dummies,
        weights=args.weights,
        period=args.period,
        cap_tol=args.cap_tol,
    )


def _fit_periods(args):
    opts = FitOptions(tolerance=args.tol, max_iterations=args.max_iter)
    out = []
    for pdat in load_dataset(_dataset_spec(args)):
        out.append((pdat, fit_censored(pdat.sample, pdat.design, opts)))
    return out


def cmd_fit(args) -> dict:
    outputs = {}
    rows = []
    for pdat, fit in _fit_periods(args):
        outputs[f"fit_{pdat.period}.json"] = to_json_text(fit.to_dict())
        for row in fit.summary_rows():
            rows.append({
                "period": pdat.period,
                **row,
                "stars": stars(row["t_stat"]),
                "n_uncensored": fit.n_uncensored,
                "n_censored": fit.n_censored,
                "converged": fit.converged,
            })
    outputs["fits.csv"] = rows_to_csv_text(rows)
    return outputs


def cmd_effects(args) -> dict:
    rows = []
    for pdat, fit in _fit_periods(args):
        for eff in effects_table(fit, u=args.u, delta_x=args.dx):
            rows.append({
                "period": pdat.period,
                "name": eff.name,
                "u": eff.u,
                "delta_x": eff.delta_x,
                "delta_pct": eff.delta_pct,
            })
    return {"effects.csv": rows_to_csv_text(
        rows, ["period", "name", "u", "delta_x", "delta_pct"]
    )}


def cmd_impute(args) -> dict:
    # periods without any capped rows have nothing to impute
    fitted = [(p, f) for p, f in _fit_periods(args) if f.n_censored > 0]
    if not fitted:
        raise ValueError("no capped observations in any period")
    fits = {pdat.period: fit for pdat, fit in fitted}
    designs = {pdat.period: pdat.design for pdat, _ in fitted}
    rows = []
    for pdat, fit in fitted:
        res = impute_topcoded(fit, "tau4", c=args.switch)
        for i, ridx in enumerate(res.rows):
            rows.append({
                "period": pdat.period,
                "row": int(ridx),
                "alpha": float(fit.alpha[ridx]),
                "imputed": float(res.imputed[i]),
                "factor": float(res.factors[i]),
                "branch": res.branches[i],
            })
    series = adjustment_factor_series(fits, c=args.switch)
    for item in args.group:
        col, sep, val = item.partition("=")
        if not sep:
            raise ValueError("--group takes COLUMN=VALUE")
        col = col.strip()
        masks = {}
        for period, design in designs.items():
            if col not in design.columns:
                raise ValueError(f"no design column named {col!r}")
            j = design.columns.index(col)
            masks[period] = design.data[:, j] == float(val)
        series.extend(adjustment_factor_series(
            fits, subgroup=masks, group_label=f"{col}={val.strip()}",
            c=args.switch,
        ))
    frows = [{
        "period": r.period,
        "group": r.group,
        "factor": r.factor,
        "imputed_mean": r.imputed_mean,
        "n_topcoded": r.n_topcoded,
    } for r in series]
    return {
        "imputed.csv": rows_to_csv_text(
            rows, ["period", "row", "alpha", "imputed", "factor", "branch"]
        ),
        "factors.csv": rows_to_csv_text(
            frows, ["period", "group", "factor", "imputed_mean", "n_topcoded"]
        ),
    }


def cmd_simulate(args) -> dict:
    opts = FitOptions()
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
        cases = [McCase(**c) for c in cfg.get("cases", [])]
        studies = [ImputationStudy(**s) for s in cfg.get("imputation", [])]
        if not cases and not studies:
            raise ValueError(
                "config file has no cases or imputation entries"
            )
        if args.quick:
            cases = [replace(c, replications=min(c.replications, 1000))
                     for c in cases]
            studies = [replace(s, replications=min(s.replications, 1000))
                       for s in studies]
        reports = run_table(cases, opts)
        reports += [run_imputation_experiment(s, opts) for s in studies]
    else:
        if args.case is None or args.n is None:
            raise ValueError("simulate needs --case and --n, or --config")
        reps = 1000 if args.quick else args.reps
        case = standard_case(args.case, args.n, reps, args.seed)
        reports = [run_case(case, opts)]
    tables = summarize(reports)
    outputs = {"report.json": to_json_text(
        [r.to_dict(include_runtime=False) for r in reports]
    )}
    if tables["coefficients"]:
        outputs["table.csv"] = rows_to_csv_text(tables["coefficients"])
        outputs["ratios.csv"] = rows_to_csv_text(tables["ratios"])
    if tables["imputation"]:
        outputs["imputation.csv"] = rows_to_csv_text(tables["imputation"])
    return outputs


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        outputs = args.func(args)
        outdir = Path(args.out_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        for name, text in outputs.items():
            atomic_write_text(outdir / name, text)
    except (ValueError, OSError, KeyError) as e:
        print(json.dumps({"error": str(e)}), file=sys.stderr)
        return 1
    for name in outputs:
        print(f"wrote {outdir / name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
