"""Imputation of outcomes recorded at a top-code.

For a Pareto tail with index alpha the expected value above a cap y_c
is alpha / (alpha - 1) * y_c, defined only for alpha > 1. Four
estimators differ in where alpha comes from: a plain tail fit that
ignores the cap (tau1), a cap-aware fit (tau2), a covariate-dependent
fit evaluated at the individual's profile (tau3), and tau3 with a
median fallback 2 ** (1 / alpha) * y_c when the index is too close to
one for the mean to be trusted (tau4).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .regression import TailRegressionFit

__all__ = [
    "ImputationResult",
    "FactorRow",
    "mean_above",
    "tau1",
    "tau2",
    "tau3",
    "tau4",
    "impute_topcoded",
    "adjustment_factor_series",
]


def mean_above(alpha, y_c: float):
    """Expected outcome above a cap under a Pareto tail.

    Vectorized over alpha; every index must exceed 1 or the mean does
    not exist.
    """
    a = np.asarray(alpha, dtype=float)
    if not (np.isfinite(y_c) and y_c > 0):
        raise ValueError("cap must be positive and finite")
    if np.any(a <= 1.0) or not np.all(np.isfinite(a)):
        raise ValueError("mean does not exist for tail index at or below 1")
    out = a / (a - 1.0) * y_c
    return float(out) if out.ndim == 0 else out


def tau1(alpha_hat: float, y_c: float) -> float:
    """Mean above the cap from a tail fit that treated capped values as exact."""
    return float(mean_above(float(alpha_hat), y_c))


def tau2(alpha_censored_hill: float, y_c: float) -> float:
    """Mean above the cap from the cap-aware unconditional fit."""
    return float(mean_above(float(alpha_censored_hill), y_c))


def _row_alpha(fit: TailRegressionFit, x_i) -> float:
    x = np.atleast_1d(np.asarray(x_i, dtype=float))
    if x.shape != (len(fit.columns),):
        raise ValueError("covariate row length must match the design columns")
    return float(np.exp(x @ fit.theta))


def _cap(fit: TailRegressionFit, y_c):
    if y_c is None:
        y_c = fit.y_c
    if y_c is None:
        raise ValueError("no cap recorded on the fit; pass y_c")
    return float(y_c)


def tau3(fit: TailRegressionFit, x_i, y_c: float | None = None) -> float:
    """Conditional mean above the cap at the individual's covariates.

    This is the optimal mean-square predictor when the conditional
    index exceeds 1; otherwise it raises and tau4 should be used.
    """
    return float(mean_above(_row_alpha(fit, x_i), _cap(fit, y_c)))


def tau4(fit: TailRegressionFit, x_i, y_c: float | None = None,
         c: float = 1.5):
    """Imputation with a median fallback near the existence boundary.

    Returns ``(value, branch)``. The mean branch applies when the
    conditional index exceeds ``c``; at or below ``c`` the conditional
    median 2 ** (1 / alpha) * y_c is used instead, which exists for any
    positive index. Values of c near 1 let the mean branch explode.
    """
    cap = _cap(fit, y_c)
    c = float(c)
    if not (np.isfinite(c) and c > 1.0):
        raise ValueError("switch threshold c must exceed 1")
    a = _row_alpha(fit, x_i)
    if a <= 0 or not np.isfinite(a):
        raise ValueError("conditional index must be positive")
    if a > c:
        return mean_above(a, cap), "mean"
    return float(2.0 ** (1.0 / a) * cap), "median"


@dataclass(frozen=True, eq=False)
class ImputationResult:
    """Imputed outcomes for the observations at the top-code.

    ``rows`` indexes the capped observations within the fitted sample;
    ``factors`` is imputed / y_c, the per-observation adjustment.
    ``branches`` records mean/median per observation for tau4 and is
    None otherwise.
    """

    imputed: np.ndarray
    rows: np.ndarray
    estimator: str
    y_c: float
    factors: np.ndarray
    branches: tuple | None = None


def impute_topcoded(fit: TailRegressionFit, method: str = "tau4",
                    y_c: float | None = None, c: float = 1.5) -> ImputationResult:
    """Impute every capped observation in a fitted sample.

    ``method`` is "tau3" (conditional mean, errors if any index is at
    or below 1) or "tau4" (median fallback below the switch threshold).
    """
    cap = _cap(fit, y_c)
    rows = np.flatnonzero(fit.censored)
    if rows.size == 0:
        raise ValueError("the fitted sample has no capped observations")
    alpha = fit.alpha[rows]
    if method == "tau3":
        vals = mean_above(alpha, cap)
        branches = None
    elif method == "tau4":
        c = float(c)
        if not (np.isfinite(c) and c > 1.0):
            raise ValueError("switch threshold c must exceed 1")
        if np.any(alpha <= 0):
            raise ValueError("conditional index must be positive")
        mean_ok = alpha > c
        vals = np.empty(alpha.size)
        vals[mean_ok] = alpha[mean_ok] / (alpha[mean_ok] - 1.0) * cap
        vals[~mean_ok] = 2.0 ** (1.0 / alpha[~mean_ok]) * cap
        branches = tuple("mean" if ok else "median" for ok in mean_ok)
    else:
        raise ValueError("method must be 'tau3' or 'tau4'")
    vals = np.atleast_1d(np.asarray(vals, dtype=float))
    return ImputationResult(
        imputed=vals,
        rows=rows,
        estimator=method,
        y_c=cap,
        factors=vals / cap,
        branches=branches,
    )


@dataclass(frozen=True)
class FactorRow:
    """One period's adjustment factor for a group of capped observations."""

    period: object
    group: str
    factor: float
    imputed_mean: float
    n_topcoded: int


def adjustment_factor_series(fits, y_c=None, subgroup=None,
                             group_label: str = "all", c: float = 1.5) -> list:
    """Per-period mean adjustment factors for capped observations.

    Parameters
    ----------
    fits : mapping
        Ordered mapping period -> TailRegressionFit.
    y_c : mapping or float, optional
        Cap per period; defaults to each fit's own cap.
    subgroup : mapping, optional
        period -> boolean mask over that fit's rows restricting the
        average (for example one demographic group). A subgroup that
        contains no capped observation raises, reporting the counts.
    c : float
        Switch threshold of the median fallback.

    Returns a list of FactorRow; ``row.factor`` is the mean of
    imputed / y_c over the selected capped observations.
    """
    out = []
    for period, fit in fits.items():
        cap = y_c
        if isinstance(y_c, dict):
            cap = y_c.get(period)
        res = impute_topcoded(fit, "tau4", cap, c)
        keep = np.ones(res.rows.size, dtype=bool)
        if subgroup is not None:
            mask = np.atleast_1d(np.asarray(subgroup[period], dtype=bool))
            if mask.size != fit.alpha.size:
                raise ValueError("subgroup mask length must match the sample")
            keep = mask[res.rows]
            if not keep.any():
                raise ValueError(
                    f"period {period}: subgroup holds 0 of the "
                    f"{res.rows.size} capped observations"
                )
        vals = res.imputed[keep]
        out.append(
            FactorRow(
                period=period,
                group=group_label,
                factor=float(np.mean(vals / res.y_c)),
                imputed_mean=float(np.mean(vals)),
                n_topcoded=int(keep.sum()),
            )
        )
    return out
