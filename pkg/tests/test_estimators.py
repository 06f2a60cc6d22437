# pylint: disable=missing-class-docstring, missing-function-docstring
"""tests for the estimators package (median, sign alignment, oracles)"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustsketch.errors import EstimateUnavailableError, SketchParameterError
from robustsketch.estimators.median import median_estimate, median_topk, quantile_all, quantile_estimate
from robustsketch.estimators.oracles import (
    classify_heavy_suspect,
    heavy_and_suspect,
    is_heavy_hitter,
    oracle_p,
)
from robustsketch.estimators.sign_alignment import (
    StableReportState,
    basic_p_hat,
    p_hat_all,
    stable_step,
    threshold_report,
)
from robustsketch.models.constants import EstimatorConstants
from robustsketch.models.kinds import Label
from robustsketch.models.params import SketchParams
from robustsketch.models.sign import Sign
from robustsketch.models.sparse_vector import SparseVector
from robustsketch.models.variant import SketchVariant
from robustsketch.robust.accounting import flip_number
from robustsketch.sketch.randomness import init_sketch
from robustsketch.sketch.state import SketchState, sketch_vector

RAND = init_sketch(SketchVariant.COUNT_SKETCH, SketchParams(n=500, d=300, b=30), seed=11)


def partially_aligned_state(key: int, aligned: int, sign: int = 1) -> SketchState:
    """key의 버킷 중 처음 aligned 개는 sign, 나머지는 -sign 방향으로 정렬된 상태"""
    counters = np.zeros(RAND.d, dtype=np.int64)
    buckets, signs = RAND.key_participation(key)
    for j, (t, s) in enumerate(zip(buckets, signs)):
        counters[t] = s * (sign if j < aligned else -sign)
    return SketchState(counters, RAND.fingerprint)


def test_median_recovers_isolated_key():
    state = sketch_vector(RAND, SparseVector.unit(42, -17))

    assert median_estimate(RAND, state, 42) == -17.0
    assert quantile_estimate(RAND, state, 42, 0.0) == -17.0
    with pytest.raises(SketchParameterError):
        quantile_estimate(RAND, state, 42, 1.5)


def test_quantile_all_matches_single_key():
    v = SparseVector.from_dict({1: 5, 2: -3, 300: 8})
    state = sketch_vector(RAND, v)
    keys = np.array([1, 2, 300, 400])

    batch = quantile_all(RAND, state, keys)
    single = [median_estimate(RAND, state, int(k)) for k in keys]
    assert np.allclose(batch, single)


def test_empty_participation_is_unavailable():
    rand = init_sketch(SketchVariant.BCOUNT_SKETCH, SketchParams(n=4000, d=20, b=20), seed=1)
    state = SketchState.empty(rand)
    counts = rand.all_keys().counts()
    lonely = int(np.flatnonzero(counts == 0)[0])

    with pytest.raises(EstimateUnavailableError):
        median_estimate(rand, state, lonely)
    # top-k 후보에서는 제외됨
    assert lonely not in median_topk(rand, state, 5, candidates=[lonely, 0, 1])


def test_median_topk_ties_prefer_smaller_key():
    state = sketch_vector(RAND, SparseVector.from_dict({9: -5, 3: 5}))
    report = median_topk(RAND, state, 1)

    assert report.keys == {3}
    assert report.values == {3: 5.0}


def test_median_topk_reports_heavy_keys_on_random_tail():
    rng = np.random.default_rng(0)
    entries = {i: int(s) for i, s in zip(range(100, 400), rng.choice([-1, 1], size=300))}
    entries.update({0: 40, 1: -40, 2: 40})
    v = SparseVector.from_dict(entries)
    state = sketch_vector(RAND, v)

    report = median_topk(RAND, state, 6)
    # k = k'/2 = 3 기준 heavy hitter는 모두 보고
    for key in (0, 1, 2):
        assert is_heavy_hitter(v, key, 3)
        assert key in report
    with pytest.raises(SketchParameterError):
        median_topk(RAND, state, 0)



def median_violation_rate(seeds, n: int, b: int, tail_size: int) -> float:
    """(v[i] - v̂[i])² > (1/b)‖v_tail[b]‖² 인 (시드, 키) 비율. 행 수는 ⌈8·ln 20⌉"""
    params = SketchParams(n=n, d=math.ceil(8 * math.log(20)) * b, b=b)
    violations = trials = 0
    for seed in seeds:
        rng = np.random.default_rng(seed)
        tail = SparseVector(np.arange(3, 3 + tail_size), rng.choice([-1, 1], size=tail_size))
        v = SparseVector(np.arange(3), np.full(3, 50)) + tail
        rand = init_sketch(SketchVariant.COUNT_SKETCH, params, seed)
        state = sketch_vector(rand, v)
        # 지지 집합과 0인 키 20개
        keys = np.arange(tail_size + 23)
        dense = np.zeros(keys.size)
        dense[v.keys] = v.values
        errors = quantile_all(rand, state, keys) - dense
        violations += int(np.sum(errors ** 2 > v.tail_norm_sq(b) / b))
        trials += keys.size
    return violations / trials


def test_median_error_within_tail_bound():
    # 무거운 키 3개 + ±1 꼬리, 위반은 5% 이하
    assert median_violation_rate(range(10), n=5000, b=10, tail_size=400) <= 0.05


@pytest.mark.slow
def test_median_error_within_tail_bound_full():
    assert median_violation_rate(range(100), n=20_000, b=30, tail_size=2000) <= 0.05


def test_basic_p_hat_counts_aligned_buckets():
    state = partially_aligned_state(42, aligned=7)

    assert basic_p_hat(RAND, state, 42, Sign.PLUS) == pytest.approx(0.7)
    assert basic_p_hat(RAND, state, 42, Sign.MINUS) == pytest.approx(0.3)


def test_threshold_report_on_single_heavy_key():
    state = sketch_vector(RAND, SparseVector.unit(42, -100))

    assert threshold_report(RAND, state, EstimatorConstants()).keys == {42}


def test_stable_step_hysteresis():
    constants = EstimatorConstants.relaxed()  # τ_m1 = 0.66, τ_m2 = 0.84
    s = StableReportState()

    # 0.7은 진입 문턱보다 낮음
    stable_step(s, RAND, partially_aligned_state(42, 7), constants, candidates=[42])
    assert s.reported == frozenset()

    stable_step(s, RAND, partially_aligned_state(42, 9), constants, candidates=[42])
    assert s.sign_of(42) is Sign.PLUS

    # 보고 중이면 0.7에서도 유지
    stable_step(s, RAND, partially_aligned_state(42, 7), constants, candidates=[42])
    assert s.sign_of(42) is Sign.PLUS

    # 부호가 뒤집히면 먼저 이탈하고 다음 단계에 반대 부호로 진입
    flipped = partially_aligned_state(42, 10, sign=-1)
    stable_step(s, RAND, flipped, constants, candidates=[42])
    assert s.sign_of(42) is None
    stable_step(s, RAND, flipped, constants, candidates=[42])
    assert s.sign_of(42) is Sign.MINUS
    assert s.changes[42] == 3


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 10), st.sampled_from([1, -1])), min_size=1, max_size=15))
def test_stable_changes_bounded_by_flip_number(steps):
    constants = EstimatorConstants.relaxed()
    s = StableReportState()
    plus_trace, minus_trace = [0.0], [0.0]
    for aligned, sign in steps:
        state = partially_aligned_state(42, aligned, sign)
        plus, minus = p_hat_all(RAND, state, np.array([42]))
        plus_trace.append(float(plus[0]))
        minus_trace.append(float(minus[0]))
        stable_step(s, RAND, state, constants, candidates=[42])

    # 부호별 추적값 (처음에는 보고되지 않은 상태이므로 0에서 시작)
    bound = flip_number(plus_trace, constants) + flip_number(minus_trace, constants)
    assert s.changes[42] <= bound


def test_stable_state_rejects_overlap():
    with pytest.raises(ValueError):
        StableReportState(k_plus={1}, k_minus={1})


def test_oracle_p_matches_two_key_probability():
    # b = 2: 다른 키가 절반 확률로 참여, 참여하면 절반 확률로 상쇄 → p⁺ = 3/4
    v = SparseVector.from_dict({0: 1, 1: 1})

    plus = oracle_p(v, 0, Sign.PLUS, num_samples=40_000, seed=5, b=2)
    minus = oracle_p(v, 0, Sign.MINUS, num_samples=40_000, seed=5, b=2)
    assert plus.within(0.75)
    assert minus.value == 0.0


def test_heavy_hitter_definition():
    v = SparseVector.from_dict({0: 10, 1: 1, 2: 1, 3: 1})

    assert is_heavy_hitter(v, 0, 1)
    assert not is_heavy_hitter(v, 1, 1)
    assert not is_heavy_hitter(v, 99, 1)


def test_classify_heavy_suspect():
    entries = {0: 100}
    entries.update({i: 1 for i in range(1, 11)})
    v = SparseVector.from_dict(entries)

    labels = classify_heavy_suspect(v, EstimatorConstants(), b=900)
    assert labels[0] is Label.HEAVY
    assert all(labels[i] is Label.SUSPECT_ONLY for i in range(1, 11))

    heavy, allowed = heavy_and_suspect(v, EstimatorConstants(), b=900)
    assert heavy == {0}
    assert allowed == set(range(11))
