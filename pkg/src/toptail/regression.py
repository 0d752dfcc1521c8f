"""Regression of the tail index on covariates under a known cap.

The conditional index is alpha(x) = exp(x' theta), so coefficients act
multiplicatively on the index and the parameter space is unrestricted.
Each retained observation contributes either a Pareto log density
(uncapped) or a log survival probability at the cap (capped). Both
branches share the form

    v_i * (exp(s_i) * L_i - d_i * s_i),     s_i = x_i' theta,

with L_i the log exceedance of the observed (or cap) value over the
threshold and d_i = 1 only for uncapped observations. The objective is
convex with a closed-form positive semidefinite Hessian, so a damped
Newton iteration converges from any start.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimators import CensoredSample, censored_hill_estimate

__all__ = [
    "DesignMatrix",
    "FitOptions",
    "TailRegressionFit",
    "select_threshold",
    "tail_members",
    "neg_loglik_censored",
    "neg_loglik_gradient",
    "neg_loglik_hessian",
    "score_residuals",
    "covariance_and_tests",
    "fit_censored",
    "fit_uncensored",
]


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """A dense design matrix with named columns.

    Rows align with the retained tail sample. An intercept, when used,
    is an explicit column of ones.
    """

    data: np.ndarray
    columns: tuple

    def __post_init__(self):
        x = np.asarray(self.data, dtype=float)
        if x.ndim != 2:
            raise ValueError("design matrix must be two dimensional")
        if x.shape[0] == 0 or x.shape[1] == 0:
            raise ValueError("design matrix is empty")
        if not np.all(np.isfinite(x)):
            raise ValueError("design matrix must be finite")
        cols = tuple(str(c) for c in self.columns)
        if len(cols) != x.shape[1]:
            raise ValueError("column names must match the number of columns")
        if len(set(cols)) != len(cols):
            raise ValueError("column names must be unique")
        object.__setattr__(self, "data", x)
        object.__setattr__(self, "columns", cols)

    @classmethod
    def from_columns(cls, named, intercept: bool = True) -> "DesignMatrix":
        """Build from an ordered mapping of name -> 1d array."""
        names = list(named)
        arrays = [np.atleast_1d(np.asarray(named[k], dtype=float)) for k in names]
        if not arrays:
            raise ValueError("at least one column is required")
        n = arrays[0].size
        if intercept:
            names = ["const"] + names
            arrays = [np.ones(n)] + arrays
        return cls(np.column_stack(arrays), tuple(names))

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    @property
    def n_cols(self) -> int:
        return self.data.shape[1]

    def take(self, idx) -> "DesignMatrix":
        return DesignMatrix(self.data[idx], self.columns)

    def means(self) -> np.ndarray:
        return self.data.mean(axis=0)

    def binary_columns(self) -> tuple:
        """Names of dummy columns: values in {0, 1} with both present.

        An all-ones intercept column is deliberately not a dummy.
        """
        out = []
        for j, name in enumerate(self.columns):
            col = self.data[:, j]
            good = np.all((col == 0.0) | (col == 1.0))
            if good and np.any(col == 0.0) and np.any(col == 1.0):
                out.append(name)
        return tuple(out)

    @property
    def has_intercept(self) -> bool:
        return any(np.all(self.data[:, j] == 1.0) for j in range(self.n_cols))


@dataclass(frozen=True)
class FitOptions:
    """Optimizer settings for the tail regressions.

    init is "auto" (log of the capped-data index estimate on the
    intercept, zeros elsewhere), "zero", or an explicit vector.
    """

    tolerance: float = 1e-8
    max_iterations: int = 200
    init: object = "auto"

    def __post_init__(self):
        if not (self.tolerance > 0 and np.isfinite(self.tolerance)):
            raise ValueError("tolerance must be positive")
        if int(self.max_iterations) < 1:
            raise ValueError("max_iterations must be at least 1")
        if isinstance(self.init, str) and self.init not in ("auto", "zero"):
            raise ValueError("init must be 'auto', 'zero', or a vector")


@dataclass(eq=False)
class TailRegressionFit:
    """Result of a tail-index regression.

    alpha holds the fitted index exp(x_i' theta) for every retained
    row, censored the cap flags for the same rows, and column_means the
    covariate means over those rows; downstream summaries (partial
    effects, imputation) read them from here.
    """

    theta: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    covariance: np.ndarray
    columns: tuple
    alpha: np.ndarray
    censored: np.ndarray
    weights: np.ndarray | None
    column_means: np.ndarray
    binary_columns: tuple
    y0: float
    y_c: float | None
    n_uncensored: int
    n_censored: int
    converged: bool
    iterations: int
    gradient_norm: float
    objective: float

    def coef(self, name: str) -> float:
        """Coefficient by column name."""
        try:
            return float(self.theta[self.columns.index(name)])
        except ValueError:
            raise ValueError(f"no column named {name!r}") from None

    def censoring_diagnostic(self) -> np.ndarray:
        """Per-row share of the tail distribution lying below the cap.

        Equals 1 - (y0 / y_c) ** alpha(x), the probability that a tail
        draw at x escapes the cap. Tends to 1 as the cap recedes; with
        no cap recorded it is exactly 1 everywhere.
        """
        if self.y_c is None:
            return np.ones_like(self.alpha)
        return -np.expm1(self.alpha * np.log(self.y0 / self.y_c))

    def summary_rows(self):
        """One dict per column: name, estimate, std_error, t_stat."""
        return [
            {"name": c, "estimate": float(t), "std_error": float(s),
             "t_stat": float(z)}
            for c, t, s, z in zip(
                self.columns, self.theta, self.std_errors, self.t_stats
            )
        ]

    def to_dict(self) -> dict:
        d = {
            "columns": list(self.columns),
            "theta": [float(v) for v in self.theta],
            "std_errors": [float(v) for v in self.std_errors],
            "t_stats": [float(v) for v in self.t_stats],
            "covariance": [[float(v) for v in row] for row in self.covariance],
            "y0": self.y0,
            "y_c": self.y_c,
            "n_uncensored": self.n_uncensored,
            "n_censored": self.n_censored,
            "converged": self.converged,
            "iterations": self.iterations,
            "gradient_norm": self.gradient_norm,
            "objective": self.objective,
        }
        return d


def select_threshold(values, k: float) -> float:
    """Threshold leaving a fraction k of the sample strictly above.

    With m = floor(k * n) the threshold is the (n - m)-th smallest
    value, i.e. the (m + 1)-th largest, so m values lie above it when
    there are no ties at the threshold itself.
    """
    v = np.atleast_1d(np.asarray(values, dtype=float))
    if v.ndim != 1 or v.size == 0:
        raise ValueError("values must be a nonempty one dimensional array")
    if not np.all(np.isfinite(v)):
        raise ValueError("values must be finite")
    if not 0 < k < 1:
        raise ValueError("k must lie strictly inside (0, 1)")
    n = v.size
    m = int(np.floor(k * n))
    if m < 1:
        raise ValueError("k leaves no observations above the threshold")
    y0 = float(np.partition(v, n - m - 1)[n - m - 1])
    if y0 >= np.max(v):
        raise ValueError("threshold is degenerate: no value exceeds it")
    return y0


def tail_members(values, k: float):
    """Indices of the m = floor(k * n) observations kept above the threshold.

    Values strictly above the threshold are kept first; if ties at the
    threshold leave that short of m, tied rows fill the gap in input
    order. Returns (y0, indices) with indices ascending.
    """
    v = np.atleast_1d(np.asarray(values, dtype=float))
    y0 = select_threshold(v, k)
    m = int(np.floor(k * v.size))
    above = np.flatnonzero(v > y0)
    if above.size < m:
        ties = np.flatnonzero(v == y0)[: m - above.size]
        above = np.sort(np.concatenate([above, ties]))
    return y0, above


def _branch_terms(sample: CensoredSample):
    L = np.where(
        sample.censored,
        np.log((sample.y_c if sample.y_c is not None else sample.y0) / sample.y0),
        np.log(sample.values / sample.y0),
    )
    d = np.where(sample.censored, 0.0, 1.0)
    return L, d, sample.effective_weights()


def _check_theta(theta, design: DesignMatrix) -> np.ndarray:
    t = np.atleast_1d(np.asarray(theta, dtype=float))
    if t.shape != (design.n_cols,):
        raise ValueError("theta length must match the design columns")
    return t


def _check_design(sample: CensoredSample, design: DesignMatrix):
    if design.n_rows != sample.m:
        raise ValueError("design rows must match the sample length")


def neg_loglik_censored(theta, sample: CensoredSample, design: DesignMatrix) -> float:
    """Negative log likelihood up to a constant in theta."""
    _check_design(sample, design)
    t = _check_theta(theta, design)
    L, d, v = _branch_terms(sample)
    s = design.data @ t
    with np.errstate(over="ignore"):
        return float(np.sum(v * (np.exp(s) * L - d * s)))


def neg_loglik_gradient(theta, sample: CensoredSample, design: DesignMatrix) -> np.ndarray:
    _check_design(sample, design)
    t = _check_theta(theta, design)
    L, d, v = _branch_terms(sample)
    s = design.data @ t
    with np.errstate(over="ignore"):
        return design.data.T @ (v * (np.exp(s) * L - d))


def neg_loglik_hessian(theta, sample: CensoredSample, design: DesignMatrix) -> np.ndarray:
    _check_design(sample, design)
    t = _check_theta(theta, design)
    L, _, v = _branch_terms(sample)
    s = design.data @ t
    with np.errstate(over="ignore"):
        h = v * np.exp(s) * L
    return (design.data * h[:, None]).T @ design.data


def score_residuals(theta, sample: CensoredSample, design: DesignMatrix) -> np.ndarray:
    """Per-observation score factor exp(s_i) * L_i - d_i.

    The gradient is X' (v * e); the outer products e_i^2 x_i x_i' feed
    the middle matrix of the sandwich covariance.
    """
    _check_design(sample, design)
    t = _check_theta(theta, design)
    L, d, _ = _branch_terms(sample)
    with np.errstate(over="ignore"):
        return np.exp(design.data @ t) * L - d


def covariance_and_tests(theta, sample: CensoredSample, design: DesignMatrix):
    """Sandwich covariance H^-1 S H^-1 and t statistics at theta.

    H is the Hessian of the objective and S the weighted sum of score
    outer products. Raises if H is singular.
    """
    t = _check_theta(theta, design)
    L, d, v = _branch_terms(sample)
    X = design.data
    with np.errstate(over="ignore"):
        a = np.exp(X @ t)
    e = a * L - d
    H = (X * (v * a * L)[:, None]).T @ X
    S = (X * (v * e * e)[:, None]).T @ X
    # inv() can return garbage on an exactly rank deficient matrix
    if np.linalg.matrix_rank(H) < H.shape[0]:
        raise ValueError("Hessian is singular; covariance is unavailable")
    try:
        Hinv = np.linalg.inv(H)
    except np.linalg.LinAlgError:
        raise ValueError("Hessian is singular; covariance is unavailable") from None
    cov = Hinv @ S @ Hinv
    cov = (cov + cov.T) / 2.0
    se = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        tstat = np.where(se > 0, t / se, np.inf * np.sign(t))
    return cov, se, tstat


def _minimize(X, L, d, v, theta0, tolerance, max_iterations):
    """Damped Newton with a pure phase near the optimum.

    Backtracking keeps distant iterates under control; once the Newton
    decrement certifies the quadratic regime the full step is taken
    without a line search, since objective decreases there can sit
    below summation rounding noise.
    """
    theta = np.asarray(theta0, dtype=float).copy()
    with np.errstate(over="ignore"):
        for it in range(max_iterations):
            s = X @ theta
            a = np.exp(s)
            g = X.T @ (v * (a * L - d))
            gnorm = float(np.max(np.abs(g)))
            if gnorm < tolerance:
                return theta, it, gnorm, True
            h = v * a * L
            H = (X * h[:, None]).T @ X
            try:
                step = np.linalg.solve(H, -g)
            except np.linalg.LinAlgError:
                step = -g
            lam2 = -float(g @ step)
            if lam2 <= 0.25:
                theta = theta + step
                continue
            k0 = float(np.sum(v * (a * L - d * s)))
            gts = float(g @ step)
            t = 1.0
            for _ in range(60):
                trial = theta + t * step
                s1 = X @ trial
                k1 = float(np.sum(v * (np.exp(s1) * L - d * s1)))
                if np.isfinite(k1) and k1 <= k0 + 1e-4 * t * gts:
                    break
                t *= 0.5
            theta = theta + t * step
        s = X @ theta
        g = X.T @ (v * (np.exp(s) * L - d))
    return theta, max_iterations, float(np.max(np.abs(g))), False


def _initial_theta(sample: CensoredSample, design: DesignMatrix, opts: FitOptions):
    p = design.n_cols
    if isinstance(opts.init, str):
        theta0 = np.zeros(p)
        if opts.init == "auto":
            ones = [
                j for j in range(p) if np.all(design.data[:, j] == 1.0)
            ]
            if ones:
                try:
                    theta0[ones[0]] = np.log(censored_hill_estimate(sample))
                except ValueError:
                    pass
        return theta0
    theta0 = np.atleast_1d(np.asarray(opts.init, dtype=float))
    if theta0.shape != (p,):
        raise ValueError("init vector length must match the design columns")
    return theta0.copy()


def fit_censored(sample: CensoredSample, design: DesignMatrix,
                 opts: FitOptions | None = None) -> TailRegressionFit:
    """Fit alpha(x) = exp(x' theta) to a capped tail sample.

    Capped rows contribute survival terms, so the fit stays consistent
    however heavy the capping. Standard errors come from the sandwich
    covariance evaluated at the estimate.
    """
    opts = opts or FitOptions()
    _check_design(sample, design)
    p = design.n_cols
    if sample.n_uncensored < p:
        raise ValueError("fit needs at least as many uncapped rows as columns")
    if np.linalg.matrix_rank(design.data) < p:
        raise ValueError("design matrix is rank deficient")
    w = sample.effective_weights()
    if float(np.sum(w[~sample.censored])) <= 0:
        raise ValueError("uncapped rows carry no weight")
    L, d, v = _branch_terms(sample)
    theta0 = _initial_theta(sample, design, opts)
    theta, iters, gnorm, ok = _minimize(
        design.data, L, d, v, theta0, opts.tolerance, int(opts.max_iterations)
    )
    if ok:
        cov, se, tstat = covariance_and_tests(theta, sample, design)
    else:
        cov = np.full((p, p), np.nan)
        se = np.full(p, np.nan)
        tstat = np.full(p, np.nan)
    with np.errstate(over="ignore"):
        alpha = np.exp(design.data @ theta)
        objective = float(np.sum(v * (alpha * L - d * (design.data @ theta))))
    return TailRegressionFit(
        theta=theta,
        std_errors=se,
        t_stats=tstat,
        covariance=cov,
        columns=design.columns,
        alpha=alpha,
        censored=sample.censored.copy(),
        weights=None if sample.weights is None else sample.weights.copy(),
        column_means=design.means(),
        binary_columns=design.binary_columns(),
        y0=sample.y0,
        y_c=sample.y_c,
        n_uncensored=sample.n_uncensored,
        n_censored=sample.n_censored,
        converged=ok,
        iterations=iters,
        gradient_norm=gnorm,
        objective=objective,
    )


def fit_uncensored(values, design: DesignMatrix, y0: float | None = None,
                   k: float | None = None, weights=None,
                   opts: FitOptions | None = None) -> TailRegressionFit:
    """Fit the tail regression treating every value as exact.

    ``values`` and ``design`` cover the full sample; the tail is then
    retained either above an explicit threshold ``y0`` or by upper
    fraction ``k``. Exactly one of the two must be supplied. Applying
    this to capped data yields the biased naive fit, which is useful as
    a comparison, not as an estimator.
    """
    v = np.atleast_1d(np.asarray(values, dtype=float))
    if v.ndim != 1:
        raise ValueError("values must be one dimensional")
    if v.size != design.n_rows:
        raise ValueError("design rows must match the values")
    if (k is None) == (y0 is None):
        raise ValueError("supply exactly one of k and y0")
    w = None
    if weights is not None:
        w = np.atleast_1d(np.asarray(weights, dtype=float))
        if w.shape != v.shape:
            raise ValueError("weights must match the sample length")
    if k is not None:
        y0, idx = tail_members(v, k)
    else:
        y0 = float(y0)
        idx = np.flatnonzero(v > y0)
        if idx.size == 0:
            raise ValueError("no observations above the threshold")
    sample = CensoredSample(
        v[idx], np.zeros(idx.size, dtype=bool), y0, None,
        None if w is None else w[idx],
    )
    return fit_censored(sample, design.take(idx), opts)
