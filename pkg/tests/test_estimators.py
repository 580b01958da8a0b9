import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from twogen.estimators import (
    Estimate,
    SeriesTruncation,
    collision_union_bound,
    default_r,
    estimate_generation,
    estimate_word_identity,
    evaluate_batch,
    finalize_uniformity,
    order_growth_experiment,
    run_event_chain_experiment,
    satisfaction_bound,
    series_tolerance,
    series_value,
    wilson_interval,
)
from twogen.perm import Permutation
from twogen.words import Word, evaluate, make_unimodal


# --- closed forms ------------------------------------------------------------


def test_satisfaction_bound_examples():
    assert satisfaction_bound(2, 100, exact=True) == Fraction(1, 25) ** 25
    assert satisfaction_bound(2, 8) == 0.25
    # floor(n / 2l) = 0 makes the bound vacuous
    assert satisfaction_bound(3, 5) == 1.0


def test_collision_bound_examples():
    assert collision_union_bound(3, 48, exact=True) == Fraction(1, 4)
    assert collision_union_bound(4, 100) == pytest.approx(4**4 * 0.16**6)
    assert collision_union_bound(4, 100) == pytest.approx(0.004295, abs=1e-6)


def test_default_r():
    assert default_r(100) == math.floor(0.5 * math.sqrt(100 * math.log(100)))
    assert default_r(1) == 1 and default_r(2) == 1


def test_series_values():
    assert series_value(10) == pytest.approx(0.88199)
    assert series_value(10, exact=True) == 1 - Fraction(1, 10) - Fraction(1, 100) - Fraction(4, 1000) - Fraction(
        23, 10**4
    ) - Fraction(171, 10**5)
    assert series_value(10, k=0) == 1.0
    with pytest.raises(ValueError):
        series_value(10, k=6)
    with pytest.raises(ValueError):
        series_value(1)


def test_series_next_term_and_tolerance():
    assert SeriesTruncation(2).next_term(10) == pytest.approx(4e-3)
    assert SeriesTruncation(5).next_term(10) == pytest.approx(171e-6)
    assert series_tolerance(100, 5, 0.001) == pytest.approx(0.003 + 50 * 171 / 100**6)


@given(st.integers(5, 10_000))
def test_series_truncations_decrease_with_order(n):
    values = [series_value(n, k, exact=True) for k in range(6)]
    assert all(a > b for a, b in zip(values, values[1:]))


@given(st.integers(0, 500), st.integers(0, 500), st.sampled_from([0.9, 0.95, 0.999]))
def test_wilson_matches_scipy(successes, failures, conf):
    trials = max(successes + failures, 1)
    lo, hi = wilson_interval(successes, trials, conf)
    ref = stats.binomtest(successes, trials).proportion_ci(conf, method="wilson")
    assert lo == pytest.approx(ref.low, abs=1e-9)
    assert hi == pytest.approx(ref.high, abs=1e-9)
    assert lo <= successes / trials <= hi


def test_estimate_validation():
    with pytest.raises(ValueError):
        Estimate(10, 11)
    with pytest.raises(ValueError):
        wilson_interval(0, 0)
    e = Estimate(100, 25, seed=1)
    assert e.stderr == pytest.approx(math.sqrt(0.25 * 0.75 / 100))
    assert set(e.to_dict()) == {"trials", "successes", "p_hat", "ci_low", "ci_high", "seed"}


# --- vectorised evaluation ---------------------------------------------------


@settings(max_examples=50, deadline=None)
@given(
    st.integers(1, 7).flatmap(
        lambda n: st.tuples(
            st.permutations(list(range(n))), st.permutations(list(range(n))), st.text("xyXY", max_size=8)
        )
    )
)
def test_evaluate_batch_matches_scalar(case):
    x, y, text = case
    got = evaluate_batch(text, np.array([x]), np.array([y]))[0]
    want = evaluate(Word(text), Permutation(x), Permutation(y))
    assert tuple(int(v) for v in got) == want.images


# --- Monte Carlo -------------------------------------------------------------


def test_generation_degenerate_and_small():
    assert estimate_generation(2, 5000, seed=1, workers=1).estimate.p_hat == 1.0
    rep = estimate_generation(3, 50_000, seed=2, workers=1)
    lo, hi = rep.estimate.interval(0.999)
    assert lo <= 13 / 18 <= hi
    assert sum(rep.verdicts.values()) == 50_000


def test_generation_reproducible_across_worker_counts():
    a = estimate_generation(6, 20_000, seed=9, workers=1)
    b = estimate_generation(6, 20_000, seed=9, workers=2)
    assert a.estimate == b.estimate and a.verdicts == b.verdicts


def test_generation_large_n_tracks_series():
    rep = estimate_generation(100, 3000, seed=4, workers=1)
    assert rep.within_tolerance()
    assert rep.deviation() <= rep.tolerance()


def test_word_identity_small():
    rep = estimate_word_identity(make_unimodal("x", "y"), 4, 200_000, seed=3, workers=1)
    lo, hi = rep.estimate.interval(0.999)
    assert lo <= 1 / 24 <= hi
    assert not rep.violation
    # degree one: the bound is vacuous and every word is the identity
    one = estimate_word_identity(make_unimodal("xy", "yx"), 1, 100, seed=3, workers=1)
    assert one.estimate.p_hat == 1.0 and one.bound == 1.0


def test_order_growth_small_and_capacity():
    rep = order_growth_experiment(50, 1, 200, seed=1, workers=1)
    assert rep.words == 1 and rep.collisions.successes == 0
    with pytest.raises(OverflowError):
        order_growth_experiment(50, 17, 10, seed=1)
    with pytest.raises(ValueError):
        order_growth_experiment(50, 0, 10, seed=1)


def test_order_growth_default_r_and_verification():
    rep = order_growth_experiment(100, 4, 2000, seed=6, workers=1)
    assert rep.r == 4 and rep.verified == 20 and rep.verification_failures == 0
    assert not rep.violation


def test_chain_first_step_frequency():
    w = make_unimodal("x", "y")
    rep = run_event_chain_experiment(20, w, 2, 40_000, seed=5, workers=1)
    s1 = rep.steps[0]
    assert s1.attempts == 40_000
    # the first trajectory returns with probability exactly 1/n
    lo, hi = s1.estimate.interval(0.999)
    assert lo <= 1 / 20 <= hi
    assert s1.bound == pytest.approx(2 / 18)
    assert rep.violations == 0 and not rep.violation


def test_chain_rejects_bad_k():
    w = make_unimodal("xx", "y")
    with pytest.raises(ValueError):
        run_event_chain_experiment(10, w, 2, 10, seed=1)


def test_chain_keeps_logs():
    rep = run_event_chain_experiment(10, make_unimodal("x", "y"), None, 50, seed=1, workers=1, keep_logs=3)
    assert rep.k == 2 and len(rep.logs) == 3
    assert [t for t, _ in rep.logs] == [0, 1, 2]


def test_finalize_uniformity_small():
    for policy in ("none", "single-query", "trajectory", "adaptive"):
        rep = finalize_uniformity(3, policy, 36_000, seed=11, workers=1)
        assert rep.samples == 36_000
        assert rep.p_value > 1e-4
    with pytest.raises(ValueError):
        finalize_uniformity(3, "bogus", 10, seed=1)


def test_monotone_decreasing_failure_probability():
    # 1 - P_n should shrink as n grows; checked on the series and on a coarse sample
    ns = [5, 10, 20, 50, 100]
    series = [1 - series_value(n) for n in ns]
    assert all(a > b for a, b in zip(series, series[1:]))
    est = [1 - estimate_generation(n, 4000, seed=n, workers=1).estimate.p_hat for n in (5, 50)]
    assert est[0] > est[1]
