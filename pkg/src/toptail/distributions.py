"""Heavy-tailed sampling distributions.

Pareto and Burr laws with closed-form quantile functions, written so
that draws deep in the upper tail stay finite in floating point. Both
laws accept a scalar or an array tail index, which is how conditional
(covariate-dependent) tails are generated.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GENERATOR",
    "ParetoLaw",
    "BurrLaw",
    "pareto_survival",
    "pareto_quantile",
    "pareto_sample",
    "burr_cdf",
    "burr_pdf",
    "burr_quantile",
    "burr_sample",
]

# Counter-based generator: spawned child seeds give independent streams
# without needing to coordinate jump-ahead offsets across replications.
GENERATOR = "philox"


def make_rng(seed) -> np.random.Generator:
    """Return a Philox generator for ``seed``.

    ``seed`` may be an integer, a ``SeedSequence``, or an existing
    ``Generator`` (returned unchanged).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def _astail(alpha):
    a = np.asarray(alpha, dtype=float)
    if not (np.all(np.isfinite(a)) and np.all(a > 0)):
        raise ValueError("tail index must be positive and finite")
    return a if a.ndim else float(a)


@dataclass(frozen=True, eq=False)
class ParetoLaw:
    """Pareto law on [scale, inf) with survival (scale / y) ** alpha.

    Parameters
    ----------
    scale : float
        Lower support point, in the units of the outcome.
    alpha : float or ndarray
        Tail index. An array gives one index per draw or evaluation
        point, broadcasting elementwise.
    """

    scale: float
    alpha: float

    def __post_init__(self):
        s = float(self.scale)
        if not (np.isfinite(s) and s > 0):
            raise ValueError("scale must be positive and finite")
        object.__setattr__(self, "scale", s)
        object.__setattr__(self, "alpha", _astail(self.alpha))


@dataclass(frozen=True, eq=False)
class BurrLaw:
    """Burr law with cdf 1 - (1 + x**(-alpha * rho)) ** (1 / rho).

    The second-order parameter ``rho`` is negative; as rho -> -inf the
    law approaches a Pareto with the same index. Draws are supported on
    (0, inf) and the upper tail decays like x ** (-alpha).
    """

    alpha: float
    rho: float = -2.0

    def __post_init__(self):
        r = float(self.rho)
        if not (np.isfinite(r) and r < 0):
            raise ValueError("rho must be negative and finite")
        object.__setattr__(self, "rho", r)
        object.__setattr__(self, "alpha", _astail(self.alpha))


def _ret(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def pareto_survival(law: ParetoLaw, y):
    """P(Y > y) for y at or above the scale."""
    y = np.asarray(y, dtype=float)
    if np.any(y < law.scale):
        raise ValueError("y must be at least the scale of the law")
    return _ret((law.scale / y) ** law.alpha)


def pareto_quantile(law: ParetoLaw, u):
    """Quantile function scale * (1 - u) ** (-1 / alpha) for u in [0, 1).

    Evaluated in log space so that u near 1 maps to a finite value
    whenever the result is representable.
    """
    u = np.asarray(u, dtype=float)
    if np.any(u < 0) or np.any(u >= 1):
        raise ValueError("u must lie in [0, 1)")
    return _ret(law.scale * np.exp(-np.log1p(-u) / law.alpha))


def pareto_sample(law: ParetoLaw, n: int, seed) -> np.ndarray:
    """Draw n values by inverting uniforms from a seeded generator."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = make_rng(seed)
    return pareto_quantile(law, rng.random(int(n)))


def _burr_t(law: BurrLaw, x):
    # log of x ** (-alpha * rho); the exponent -alpha*rho is positive
    return -law.alpha * law.rho * np.log(x)


def burr_cdf(law: BurrLaw, x):
    """Distribution function at x > 0.

    Uses log1p(exp(t)) = logaddexp(0, t) so that both tails evaluate
    without overflow.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("x must be positive")
    t = _burr_t(law, x)
    return _ret(-np.expm1(np.logaddexp(0.0, t) / law.rho))


def burr_pdf(law: BurrLaw, x):
    """Density at x > 0, evaluated in log space."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("x must be positive")
    lx = np.log(x)
    t = -law.alpha * law.rho * lx
    logf = (
        np.log(law.alpha)
        + (-law.alpha * law.rho - 1.0) * lx
        + (1.0 / law.rho - 1.0) * np.logaddexp(0.0, t)
    )
    return _ret(np.exp(logf))


def burr_quantile(law: BurrLaw, u):
    """Quantile function for u in (0, 1).

    The inverse is ((1 - u) ** rho - 1) ** (-1 / (alpha * rho)). For u
    close to 1 the bracket overflows a double, but its log does not:
    log(exp(s) - 1) ~ s once s is large, so the computation switches to
    that asymptote and the quantile stays finite.
    """
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0) or np.any(u >= 1):
        raise ValueError("u must lie strictly inside (0, 1)")
    s = law.rho * np.log1p(-u)  # positive
    with np.errstate(over="ignore"):
        logbr = np.where(s > 700.0, s, np.log(np.expm1(np.minimum(s, 700.0))))
    return _ret(np.exp(-logbr / (law.alpha * law.rho)))


def burr_sample(law: BurrLaw, n: int, seed) -> np.ndarray:
    """Draw n values by inverting uniforms from a seeded generator."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = make_rng(seed)
    u = rng.random(int(n))
    # random() can return exactly 0, which the quantile excludes
    u[u == 0.0] = np.nextafter(0.0, 1.0)
    return burr_quantile(law, u)
