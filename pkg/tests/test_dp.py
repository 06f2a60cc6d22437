# pylint: disable=missing-class-docstring, missing-function-docstring
"""tests for the dp package (Laplace noise, ThresholdMonitor)"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustsketch.dp.laplace import (
    LaplaceNoise,
    ZeroNoise,
    clipped_sum_exceed,
    laplace_from_uniform,
    laplace_survival,
)
from robustsketch.dp.threshold_monitor import PrivacyParams, tm_init, tm_query
from robustsketch.errors import SketchParameterError
from robustsketch.models.answer import Answer
from robustsketch.models.sign import Sign

EPS, DELTA = 1.0, 1e-6


def test_laplace_inverse_cdf():
    assert laplace_from_uniform(0.5, 2.0) == 0.0
    assert laplace_from_uniform(0.9, 2.0) == pytest.approx(-laplace_from_uniform(0.1, 2.0))
    # Pr[X ≥ z] 와 역 CDF가 일치
    z = laplace_from_uniform(0.8, 3.0)
    assert laplace_survival(z, 3.0) == pytest.approx(0.2)
    assert laplace_survival(0.0, 3.0) == 0.5


def test_laplace_noise_is_seeded():
    a, b = LaplaceNoise(seed=4), LaplaceNoise(seed=4)

    assert a.sample(2.0) == b.sample(2.0)
    assert np.array_equal(a.samples(2.0, 10), b.samples(2.0, 10))


@pytest.mark.parametrize("x", [-40.0, -5.0, 0.0, 3.0, 25.0])
def test_clipped_sum_exceed_matches_monte_carlo(x):
    rng = np.random.default_rng(1)
    a_scale, b_scale, clip = 10.0, 4.0, 6.0
    size = 400_000
    a = rng.laplace(0.0, a_scale, size)
    b = np.minimum(clip, rng.laplace(0.0, b_scale, size))

    empirical = float(np.mean(a + b >= x))
    assert clipped_sum_exceed(x, a_scale, b_scale, clip) == pytest.approx(empirical, abs=0.005)


def test_clipped_sum_exceed_is_monotone():
    values = [clipped_sum_exceed(x, 10.0, 4.0, 6.0) for x in np.linspace(-80, 80, 41)]

    assert all(u >= v for u, v in zip(values, values[1:]))
    assert values[0] > 0.99 and values[-1] < 0.01


def test_privacy_params_validation():
    params = PrivacyParams(EPS, DELTA, 3)
    assert params.b_scale == pytest.approx(math.log(1e6))
    assert params.a_scale == pytest.approx(10 * params.Delta)

    with pytest.raises(SketchParameterError):
        PrivacyParams(0.0, DELTA, 3)
    with pytest.raises(SketchParameterError):
        PrivacyParams(EPS, 1.0, 3)
    with pytest.raises(SketchParameterError):
        PrivacyParams(EPS, DELTA, 0)
    # (1/ε)·ln(1/δ) ≤ 1 이면 Δ ≤ 0
    with pytest.raises(SketchParameterError):
        PrivacyParams(10.0, 0.5, 3)


def test_zero_noise_deactivates_at_access_limit():
    m = tm_init(5, EPS, DELTA, access_limit=2)
    everything = np.ones(5, dtype=bool)

    assert tm_query(m, everything, Sign.PLUS, 5) is Answer.TOP
    assert m.counters.tolist() == [1] * 5
    assert m.query(np.array([0, 1]), Sign.PLUS, 2) is Answer.TOP
    # 두 번 ⊤에 참여한 원소는 비활성
    assert m.active.tolist() == [False, False, True, True, True]
    assert m.active_count(everything) == 3
    assert m.query(everything, Sign.PLUS, 4) is Answer.BOTTOM
    assert m.queries == 3 and m.tops == 2


def test_negative_direction_query():
    m = tm_init(4, EPS, DELTA, access_limit=5)

    # s = -1: f̂ ≤ τ 이면 ⊤
    assert m.query(np.array([0]), Sign.MINUS, 2) is Answer.TOP
    assert m.query(np.array([0, 1, 2]), Sign.MINUS, 2) is Answer.BOTTOM
    assert m.counters.tolist() == [1, 0, 0, 0]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 1000),
       st.lists(st.tuples(st.lists(st.booleans(), min_size=8, max_size=8),
                          st.floats(-200, 200)), min_size=1, max_size=15))
def test_bottom_answers_leave_state_unchanged(seed, queries):
    m = tm_init(8, EPS, DELTA, access_limit=3, noise=LaplaceNoise(seed))
    for mask, tau in queries:
        f = np.array(mask)
        counters, active = m.counters.copy(), m.active.copy()
        satisfied = np.flatnonzero(f & active)

        answer = m.query(f, Sign.PLUS, tau)
        if answer is Answer.BOTTOM:
            assert np.array_equal(m.counters, counters)
            assert np.array_equal(m.active, active)
        else:
            expected = counters.copy()
            expected[satisfied] += 1
            assert np.array_equal(m.counters, expected)
        assert np.array_equal(m.active, m.counters < 3)


def test_sequential_queries_match_one_by_one():
    rng = np.random.default_rng(3)
    groups = np.repeat(np.arange(30), 4)
    elements = rng.integers(0, 12, size=groups.size)
    predicates = [rng.random(groups.size) < 0.7, rng.random(groups.size) < 0.7]

    batched = tm_init(12, EPS, DELTA, access_limit=2, keep_transcript=True)
    tops = batched.sequential_queries(groups, 30, predicates, elements, Sign.PLUS, 3.0)

    single = tm_init(12, EPS, DELTA, access_limit=2)
    expected = []
    for g in range(30):
        for j, mask in enumerate(predicates):
            f = np.zeros(12, dtype=bool)
            f[elements[(groups == g) & mask]] = True
            if single.query(f, Sign.PLUS, 3.0) is Answer.TOP:
                expected.append((g, j))
                break

    assert tops == expected
    assert np.array_equal(batched.counters, single.counters)
    assert batched.queries == single.queries == len(batched.transcript)


def test_top_probability_with_zero_noise():
    m = tm_init(3, EPS, DELTA, access_limit=1, noise=ZeroNoise())

    assert m.top_probability(5, Sign.PLUS, 5.0) == 1.0
    assert m.top_probability(4, Sign.PLUS, 5.0) == 0.0
    assert m.top_probability(4, Sign.MINUS, 5.0) == 1.0


def test_commit_charges_without_noise():
    m = tm_init(4, EPS, DELTA, access_limit=1, keep_transcript=True)

    assert m.commit(np.array([1, 2]), Sign.PLUS, 1.0) == 2
    assert m.active.tolist() == [True, False, False, True]
    assert m.transcript[-1].answer is Answer.TOP


@pytest.mark.slow
def test_noise_stays_within_utility_bound():
    r, beta = 2000, 0.01
    m = tm_init(10, EPS, DELTA, access_limit=r + 1, noise=LaplaceNoise(7), keep_transcript=True)
    f = np.ones(10, dtype=bool)
    for _ in range(r):
        m.query(f, Sign.PLUS, 1e9)

    bound = m.params.utility_bound(r, beta)
    errors = [abs(rec.noisy_count - rec.true_count) for rec in m.transcript]
    assert max(errors) <= bound
