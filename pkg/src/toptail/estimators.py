"""Classical tail-index estimators for samples with a known cap.

A sample is a set of exceedances over a threshold y0 in which some
values were recorded at a cap y_c instead of their true magnitude. The
estimators here treat uncapped values as exact Pareto draws and capped
ones through their survival probability.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CensoredSample",
    "apply_top_code",
    "hill_estimate",
    "censored_hill_estimate",
    "censored_pareto_loglik",
]


def apply_top_code(values, y_c: float, tol: float = 0.0):
    """Cap values at y_c and flag the capped ones.

    Returns ``(capped, flag)`` where ``flag`` marks entries with
    ``value >= y_c - tol``. A small tolerance absorbs caps that were
    rounded when the data were recorded.
    """
    v = np.asarray(values, dtype=float)
    if not np.isfinite(y_c) or y_c <= 0:
        raise ValueError("cap must be positive and finite")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    flag = v >= y_c - tol
    return np.where(flag, y_c, v), flag


@dataclass(frozen=True, eq=False)
class CensoredSample:
    """Exceedances over a threshold, some recorded at a cap.

    Parameters
    ----------
    values : ndarray
        Observed magnitudes w_i. A capped observation stores the cap
        itself; an uncapped one stores the true value.
    censored : ndarray of bool
        True where the observation was capped.
    y0 : float
        Threshold the values exceed. Must be positive.
    y_c : float, optional
        The cap. Required whenever any observation is flagged.
    weights : ndarray, optional
        Nonnegative sampling weights, one per observation. Omitted
        means equally weighted.
    """

    values: np.ndarray
    censored: np.ndarray
    y0: float
    y_c: float | None = None
    weights: np.ndarray | None = None

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        c = np.atleast_1d(np.asarray(self.censored, dtype=bool))
        if v.ndim != 1 or c.ndim != 1:
            raise ValueError("values and censored must be one dimensional")
        if v.shape != c.shape:
            raise ValueError("values and censored must have the same length")
        if v.size == 0:
            raise ValueError("sample is empty")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        y0 = float(self.y0)
        if not (np.isfinite(y0) and y0 > 0):
            raise ValueError("threshold must be positive and finite")
        if np.any(v < y0):
            raise ValueError("values must be at least the threshold")
        y_c = self.y_c
        if y_c is None:
            if c.any():
                raise ValueError("capped observations need a cap value")
        else:
            y_c = float(y_c)
            if not (np.isfinite(y_c) and y_c > y0):
                raise ValueError("cap must exceed the threshold")
            if np.any(v[c] != y_c):
                raise ValueError("capped values must equal the cap")
            if np.any(v[~c] > y_c):
                raise ValueError("uncapped values must not exceed the cap")
        w = self.weights
        if w is not None:
            w = np.atleast_1d(np.asarray(w, dtype=float))
            if w.shape != v.shape:
                raise ValueError("weights must match the sample length")
            if not (np.all(np.isfinite(w)) and np.all(w >= 0)):
                raise ValueError("weights must be nonnegative and finite")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "censored", c)
        object.__setattr__(self, "y0", y0)
        object.__setattr__(self, "y_c", y_c)
        object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        """Total number of observations."""
        return self.values.size

    @property
    def n_uncensored(self) -> int:
        return int(np.count_nonzero(~self.censored))

    @property
    def n_censored(self) -> int:
        return int(np.count_nonzero(self.censored))

    def effective_weights(self) -> np.ndarray:
        """Weights as an array, ones when none were given."""
        if self.weights is None:
            return np.ones(self.m)
        return self.weights


def hill_estimate(values, m: int | None = None, y0: float | None = None,
                  weights=None) -> float:
    """Maximum likelihood tail index from exceedances over a threshold.

    The threshold is given either directly as ``y0`` (keep values
    strictly above it) or through ``m``, the number of upper order
    statistics to keep, in which case the threshold is the (m+1)-th
    largest value. Exactly one of the two must be supplied.

    With weights the estimate is sum(w) / sum(w * log(v / y0)) over the
    retained values.
    """
    v = np.atleast_1d(np.asarray(values, dtype=float))
    if v.ndim != 1 or v.size == 0:
        raise ValueError("values must be a nonempty one dimensional array")
    if not (np.all(np.isfinite(v)) and np.all(v > 0)):
        raise ValueError("values must be positive and finite")
    if (m is None) == (y0 is None):
        raise ValueError("supply exactly one of m and y0")
    w = None
    if weights is not None:
        w = np.atleast_1d(np.asarray(weights, dtype=float))
        if w.shape != v.shape:
            raise ValueError("weights must match the sample length")
        if not (np.all(np.isfinite(w)) and np.all(w >= 0)):
            raise ValueError("weights must be nonnegative and finite")
    if m is not None:
        m = int(m)
        if not 1 <= m < v.size:
            raise ValueError("m must satisfy 1 <= m < sample size")
        # stable sort on negated values: ties keep ascending input order
        order = np.argsort(-v, kind="stable")
        keep = order[:m]
        thr = v[order[m]]
    else:
        thr = float(y0)
        if not (np.isfinite(thr) and thr > 0):
            raise ValueError("threshold must be positive and finite")
        keep = np.flatnonzero(v > thr)
        if keep.size == 0:
            raise ValueError("no observations above the threshold")
    logs = np.log(v[keep] / thr)
    if w is None:
        num = float(keep.size)
        den = float(np.sum(logs))
    else:
        num = float(np.sum(w[keep]))
        den = float(np.sum(w[keep] * logs))
    if den <= 0 or num <= 0:
        raise ValueError("retained values are degenerate at the threshold")
    return num / den


def _loglik_pieces(sample: CensoredSample):
    w = sample.effective_weights()
    unc = ~sample.censored
    n0w = float(np.sum(w[unc]))
    den = float(np.sum(w[unc] * np.log(sample.values[unc] / sample.y0)))
    if sample.y_c is not None:
        den += float(np.sum(w[sample.censored]) * np.log(sample.y_c / sample.y0))
    const = float(np.sum(w[unc] * np.log(sample.values[unc])))
    return n0w, den, const


def censored_hill_estimate(sample: CensoredSample) -> float:
    """Tail index that accounts for capped observations.

    Uncapped values enter through their log exceedance over the
    threshold; capped ones contribute log(y_c / y0) each. The estimate
    is the ratio of the uncapped (weighted) count to that pooled sum,
    which maximizes the capped-data likelihood exactly.
    """
    n0w, den, _ = _loglik_pieces(sample)
    if n0w <= 0:
        raise ValueError("estimator needs at least one uncapped observation")
    if den <= 0:
        raise ValueError("sample is degenerate at the threshold")
    return n0w / den


def censored_pareto_loglik(sample: CensoredSample, alpha):
    """Log likelihood of a Pareto index for a capped sample.

    Uncapped observations contribute the log density, capped ones the
    log survival at the cap. Vectorized over ``alpha``.
    """
    a = np.asarray(alpha, dtype=float)
    if np.any(a <= 0) or not np.all(np.isfinite(a)):
        raise ValueError("alpha must be positive and finite")
    n0w, den, const = _loglik_pieces(sample)
    out = n0w * np.log(a) - a * den - const
    return float(out) if out.ndim == 0 else out
