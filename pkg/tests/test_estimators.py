from __future__ import annotations

import numpy as np
import pytest

from toptail.distributions import ParetoLaw, make_rng, pareto_sample
from toptail.estimators import (
    CensoredSample,
    apply_top_code,
    censored_hill_estimate,
    censored_pareto_loglik,
    hill_estimate,
)

LOG2 = np.log(2.0)


def test_apply_top_code_basic():
    w, flag = apply_top_code(np.array([1.0, 5.0, 3.0, 7.0]), 5.0)
    np.testing.assert_array_equal(w, [1.0, 5.0, 3.0, 5.0])
    np.testing.assert_array_equal(flag, [False, True, False, True])


def test_apply_top_code_tolerance():
    # values within tol of the cap count as capped and are set to the cap
    v = np.array([4.996, 4.2, 5.0])
    w, flag = apply_top_code(v, 5.0, tol=0.005)
    np.testing.assert_array_equal(flag, [True, False, True])
    np.testing.assert_array_equal(w, [5.0, 4.2, 5.0])
    with pytest.raises(ValueError):
        apply_top_code(v, 5.0, tol=-0.1)
    with pytest.raises(ValueError):
        apply_top_code(v, 0.0)


def test_sample_container_validation():
    ok = CensoredSample(np.array([2.0, 4.0]), np.array([False, True]), 1.0, 4.0)
    assert ok.n_uncensored == 1 and ok.n_censored == 1 and ok.m == 2
    with pytest.raises(ValueError):
        CensoredSample(np.array([]), np.array([]), 1.0)
    with pytest.raises(ValueError):
        CensoredSample(np.array([2.0]), np.array([True, False]), 1.0)
    with pytest.raises(ValueError):
        CensoredSample(np.array([2.0]), np.array([False]), 0.0)
    with pytest.raises(ValueError):
        CensoredSample(np.array([0.5]), np.array([False]), 1.0)
    # censoring flags require a cap
    with pytest.raises(ValueError):
        CensoredSample(np.array([2.0]), np.array([True]), 1.0)
    # capped entries must sit exactly at the cap
    with pytest.raises(ValueError):
        CensoredSample(np.array([3.0]), np.array([True]), 1.0, 4.0)
    # uncapped entries cannot exceed the cap
    with pytest.raises(ValueError):
        CensoredSample(np.array([5.0]), np.array([False]), 1.0, 4.0)
    with pytest.raises(ValueError):
        CensoredSample(np.array([2.0]), np.array([False]), 1.0, 0.5)
    with pytest.raises(ValueError):
        CensoredSample(np.array([2.0]), np.array([False]), 1.0,
                       weights=np.array([-1.0]))


def test_sample_allows_uncensored_at_cap():
    s = CensoredSample(np.array([4.0, 4.0]), np.array([False, True]), 1.0, 4.0)
    assert s.n_censored == 1


def test_effective_weights_default_to_ones():
    s = CensoredSample(np.array([2.0, 3.0]), np.array([False, False]), 1.0)
    np.testing.assert_array_equal(s.effective_weights(), [1.0, 1.0])
    t = CensoredSample(np.array([2.0, 3.0]), np.array([False, False]), 1.0,
                       weights=np.array([2.0, 0.5]))
    np.testing.assert_array_equal(t.effective_weights(), [2.0, 0.5])


def test_hill_single_value():
    assert hill_estimate(np.array([np.e]), y0=1.0) == pytest.approx(1.0, rel=1e-14)


def test_hill_three_values():
    est = hill_estimate(np.array([2.0, 4.0, 8.0]), y0=1.0)
    assert est == pytest.approx(1.0 / (2.0 * LOG2), rel=1e-14)


def test_hill_m_convention():
    # top-m order statistics relative to the (m+1)th largest
    v = np.arange(1.0, 11.0)
    est = hill_estimate(v, m=2)
    mean_log = np.mean([np.log(10.0 / 8.0), np.log(9.0 / 8.0)])
    assert est == pytest.approx(1.0 / mean_log, rel=1e-14)


def test_hill_argument_errors():
    v = np.array([2.0, 4.0])
    with pytest.raises(ValueError):
        hill_estimate(v)
    with pytest.raises(ValueError):
        hill_estimate(v, m=1, y0=1.0)
    with pytest.raises(ValueError):
        hill_estimate(v, m=0)
    with pytest.raises(ValueError):
        hill_estimate(v, m=2)
    with pytest.raises(ValueError):
        hill_estimate(np.array([1.0, -2.0]), y0=0.5)
    with pytest.raises(ValueError):
        hill_estimate(np.array([3.0, 3.0]), y0=3.0)


def test_hill_tie_rule_uses_first_indices():
    # boundary ties resolve by ascending position, visible through weights
    v = np.array([8.0, 4.0, 4.0, 1.0])
    wt = np.array([1.0, 1.0, 9.0, 1.0])
    est = hill_estimate(v, m=2, weights=wt)
    assert est == pytest.approx(2.0 / LOG2, rel=1e-14)


def test_hill_monotone_in_observation():
    v = np.array([2.0, 4.0, 8.0])
    lo = hill_estimate(v, y0=1.0)
    v2 = v.copy()
    v2[1] = 6.0
    assert hill_estimate(v2, y0=1.0) < lo


def test_censored_hill_reduces_without_caps():
    v = np.array([2.0, 4.0, 8.0])
    s = CensoredSample(v, np.zeros(3, bool), 1.0)
    assert censored_hill_estimate(s) == pytest.approx(
        hill_estimate(v, y0=1.0), rel=1e-14)


def test_censored_hill_two_point_example():
    s = CensoredSample(np.array([2.0, 4.0]), np.array([False, True]), 1.0, 4.0)
    assert censored_hill_estimate(s) == pytest.approx(1.0 / (3.0 * LOG2), rel=1e-14)


def test_censored_hill_cap_share():
    # k capped at e plus one exact e gives 1 / (1 + k)
    for k in (1, 2, 5):
        v = np.full(k + 1, np.e)
        c = np.array([True] * k + [False])
        s = CensoredSample(v, c, 1.0, np.e)
        assert censored_hill_estimate(s) == pytest.approx(1.0 / (1.0 + k), rel=1e-13)


def test_censored_hill_needs_uncensored_point():
    s = CensoredSample(np.array([4.0, 4.0]), np.array([True, True]), 1.0, 4.0)
    with pytest.raises(ValueError):
        censored_hill_estimate(s)


def test_censored_hill_weighted():
    s = CensoredSample(np.array([2.0, 4.0]), np.array([False, True]), 1.0, 4.0,
                       weights=np.array([2.0, 3.0]))
    expect = 2.0 / (2.0 * LOG2 + 3.0 * np.log(4.0))
    assert censored_hill_estimate(s) == pytest.approx(expect, rel=1e-14)


def test_loglik_reference_value():
    s = CensoredSample(np.array([np.e]), np.array([False]), 1.0)
    assert censored_pareto_loglik(s, 1.0) == pytest.approx(-2.0, abs=1e-12)


def test_loglik_vectorized_alpha():
    s = CensoredSample(np.array([2.0, 4.0]), np.array([False, True]), 1.0, 4.0)
    grid = np.array([0.5, 1.0, 2.0])
    out = censored_pareto_loglik(s, grid)
    assert out.shape == grid.shape
    singles = [censored_pareto_loglik(s, a) for a in grid]
    np.testing.assert_allclose(out, singles, rtol=1e-14)
    with pytest.raises(ValueError):
        censored_pareto_loglik(s, 0.0)


def test_loglik_peaks_at_estimator():
    rng = make_rng(3)
    v = pareto_sample(ParetoLaw(1.0, 2.0), 400, rng)
    w, flag = apply_top_code(v, 3.0)
    s = CensoredSample(w, flag, 1.0, 3.0)
    ahat = censored_hill_estimate(s)
    peak = censored_pareto_loglik(s, ahat)
    for d in (1e-4, 1e-2, 0.3):
        assert peak > censored_pareto_loglik(s, ahat + d)
        assert peak > censored_pareto_loglik(s, ahat - d)
    # concave in alpha along a grid
    grid = np.linspace(0.5, 4.0, 61)
    ll = censored_pareto_loglik(s, grid)
    assert np.all(np.diff(ll, 2) < 0)


def test_estimators_scale_invariant():
    rng = make_rng(8)
    v = pareto_sample(ParetoLaw(1.0, 1.5), 300, rng)
    w, flag = apply_top_code(v, 4.0)
    base = CensoredSample(w, flag, 1.0, 4.0)
    for lam in (0.5, 3.7):
        s = CensoredSample(lam * w, flag, lam * 1.0, lam * 4.0)
        assert censored_hill_estimate(s) == pytest.approx(
            censored_hill_estimate(base), rel=1e-13)
        assert hill_estimate(lam * w, y0=lam) == pytest.approx(
            hill_estimate(w, y0=1.0), rel=1e-13)


def test_censored_estimator_removes_cap_bias():
    """Capping at the 95th percentile barely moves the corrected estimate."""
    law = ParetoLaw(1.0, 2.0)
    reps = 2000
    n = 5000
    children = np.random.SeedSequence(2718).spawn(reps)
    cens = np.empty(reps)
    naive = np.empty(reps)
    for r in range(reps):
        y = pareto_sample(law, n, children[r])
        y_c = np.quantile(y, 0.95)
        w, flag = apply_top_code(y, y_c)
        s = CensoredSample(w, flag, 1.0, y_c)
        cens[r] = censored_hill_estimate(s)
        naive[r] = hill_estimate(w, y0=1.0)
    assert abs(np.mean(cens) - 2.0) < 0.02
    assert abs(np.mean(naive) - 2.0) > 5.0 * abs(np.mean(cens) - 2.0)
