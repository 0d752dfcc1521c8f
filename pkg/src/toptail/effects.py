"""Partial effects of covariates on extreme outcomes.

A fitted coefficient lives in log-index units; these helpers translate
it into the percentage change in the probability of exceeding a high
conditional quantile. For a continuous covariate the change from a
delta_x increment is

    ((1 - u) ** (theta_j * delta_x) - 1) * 100,

where u is the tail-probability level of the event. A negative
coefficient lowers the index, fattens the tail, and therefore raises
the exceedance probability, so the effect has the opposite sign of the
coefficient.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .regression import TailRegressionFit

__all__ = [
    "PartialEffect",
    "partial_effect_continuous",
    "partial_effect_discrete",
    "unconditional_quantile_order",
    "average_tail_index",
    "effects_table",
]


@dataclass(frozen=True)
class PartialEffect:
    """A covariate's percentage effect on an extreme-event probability."""

    name: str
    u: float
    delta_x: float
    delta_pct: float


def _check_u(u: float) -> float:
    u = float(u)
    if not 0 < u < 1:
        raise ValueError("u must lie strictly inside (0, 1)")
    return u


def partial_effect_continuous(theta_j: float, u: float = 0.15,
                              delta_x: float = 1.0) -> float:
    """Percent change in the exceedance probability of the conditional
    u-tail event after a delta_x increase in the covariate."""
    u = _check_u(u)
    t = float(theta_j)
    dx = float(delta_x)
    if not (np.isfinite(t) and np.isfinite(dx)):
        raise ValueError("coefficient and increment must be finite")
    return ((1.0 - u) ** (t * dx) - 1.0) * 100.0


def partial_effect_discrete(fit: TailRegressionFit, name: str,
                            u: float = 0.15, x_base=None) -> float:
    """Percent effect of switching a dummy from 0 to 1.

    The index ratio alpha(x, d=1) / alpha(x, d=0) is evaluated at
    ``x_base`` (covariate means over the retained tail when omitted)
    and enters the exceedance probability through its exponent.
    """
    u = _check_u(u)
    if name not in fit.columns:
        raise ValueError(f"no column named {name!r}")
    j = fit.columns.index(name)
    if x_base is None:
        base = fit.column_means.copy()
    else:
        base = np.atleast_1d(np.asarray(x_base, dtype=float))
        if base.shape != (len(fit.columns),):
            raise ValueError("x_base length must match the design columns")
        base = base.copy()
    x1 = base.copy()
    x0 = base.copy()
    x1[j] = 1.0
    x0[j] = 0.0
    ratio = float(np.exp(x1 @ fit.theta) / np.exp(x0 @ fit.theta))
    return ((1.0 - u) ** (ratio - 1.0) - 1.0) * 100.0


def unconditional_quantile_order(u: float, tail_mass: float) -> float:
    """Overall quantile order of the conditional u-tail quantile.

    When the tail holds ``tail_mass`` of the distribution, the value
    splitting the top u of the tail sits at overall order
    (1 - tail_mass) + (1 - u) * tail_mass. u = 1 returns the order of
    the threshold itself.
    """
    u = float(u)
    tm = float(tail_mass)
    if not 0 < u <= 1:
        raise ValueError("u must lie in (0, 1]")
    if not 0 < tm < 1:
        raise ValueError("tail_mass must lie strictly inside (0, 1)")
    return (1.0 - tm) + (1.0 - u) * tm


def average_tail_index(fit: TailRegressionFit, design=None,
                       use_weights: bool = False) -> float:
    """Mean fitted index exp(x' theta) over a sample.

    By default the average runs over the estimation sample; passing a
    design matrix evaluates the fitted index on its rows instead, for
    example the full cross section rather than the retained tail.
    """
    if design is not None:
        alpha = np.exp(design.data @ fit.theta)
        return float(np.mean(alpha))
    if use_weights and fit.weights is not None:
        return float(np.average(fit.alpha, weights=fit.weights))
    return float(np.mean(fit.alpha))


def effects_table(fit: TailRegressionFit, u: float = 0.15,
                  delta_x: float = 1.0, skip=()) -> list:
    """Partial effects for every non-intercept column, ascending.

    Dummy columns get the discrete effect at the covariate means;
    remaining columns the continuous effect for a delta_x increment.
    Columns listed in ``skip`` and constant columns are left out.
    """
    rows = []
    for j, name in enumerate(fit.columns):
        # the intercept has no effect of its own
        if name in skip or name == "const":
            continue
        if name in fit.binary_columns:
            pct = partial_effect_discrete(fit, name, u)
            rows.append(PartialEffect(name, u, 1.0, pct))
        else:
            pct = partial_effect_continuous(fit.theta[j], u, delta_x)
            rows.append(PartialEffect(name, u, float(delta_x), pct))
    rows.sort(key=lambda r: r.delta_pct)
    return rows
