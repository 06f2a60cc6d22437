# pylint: disable=missing-class-docstring, missing-function-docstring
"""tests for the robust package (threshold, stable, fast query, accounting, transcript)"""

import itertools
import time

import numpy as np
import pytest

from robustsketch.dp.laplace import LaplaceNoise
from robustsketch.estimators.sign_alignment import threshold_report
from robustsketch.models.constants import EstimatorConstants
from robustsketch.models.params import SketchParams
from robustsketch.models.sign import Sign
from robustsketch.models.sparse_vector import SparseVector
from robustsketch.models.variant import CounterKind, SketchVariant
from robustsketch.robust.accounting import (
    SequenceAccounting,
    flip_number,
    lambda_number,
    useful_bucket_fraction,
)
from robustsketch.robust import stable as stable_module
from robustsketch.robust.fast_query import fastquery_variant, make_fast_query
from robustsketch.robust.stable import StableRobustState, robust_stable_update
from robustsketch.robust.threshold import default_privacy, robust_init, robust_threshold_query
from robustsketch.robust.transcript import TRANSCRIPT_COLUMNS, transcript_rows
from robustsketch.robust.weight import WeightEstimatorParams
from robustsketch.sketch.randomness import init_sketch
from robustsketch.sketch.state import SketchState, sketch_vector

PARAMS = SketchParams(n=500, d=200, b=10)
RAND = init_sketch(SketchVariant.BCOUNT_SKETCH, PARAMS, seed=21)
RELAXED = EstimatorConstants.relaxed()  # τ_m = 0.75, τ_m1 = 0.66, τ_m2 = 0.84
COUNTS = RAND.all_keys().counts()
# |T_i| ≥ d/b 인 키 (혼자 있으면 모든 임계값을 넘음)
WIDE_KEYS = np.flatnonzero(COUNTS >= PARAMS.ell)


def robust(access_limit=1000, **kwargs):
    return robust_init(RAND, RELAXED, access_limit, max_queries=100, epsilon=1.0, delta=1e-6,
                       **kwargs)


def random_vector(seed: int) -> SparseVector:
    rng = np.random.default_rng(seed)
    entries = {int(k): int(s) for k, s in zip(rng.choice(500, 80, replace=False),
                                              rng.choice([-1, 1], 80))}
    entries.update({int(WIDE_KEYS[0]): 30, int(WIDE_KEYS[1]): -30})
    return SparseVector.from_dict(entries)


def test_default_privacy():
    eps, delta = default_privacy(n=100, b=10, access_limit=4, max_queries=5)

    assert eps == 0.5
    assert delta == pytest.approx(1 / (100 * 5 * 10 * 4))


def test_zero_noise_threshold_query_matches_basic_estimator():
    for seed in range(3):
        v = random_vector(seed)
        state = sketch_vector(RAND, v)

        report = robust_threshold_query(robust(), state)
        assert report == threshold_report(RAND, state, RELAXED)


def test_threshold_query_exhausts_buckets():
    key = int(WIDE_KEYS[0])
    rs = robust(access_limit=1)
    state = sketch_vector(RAND, SparseVector.unit(key, 50))

    assert key in robust_threshold_query(rs, state, candidates=[key])
    # L = 1: ⊤ 한 번으로 T_i가 모두 비활성
    assert key not in robust_threshold_query(rs, state, candidates=[key])
    assert key in rs.diagnostics[-1].exhausted_keys
    assert rs.diagnostics[-1].inactive_fraction[key] == 1.0
    assert rs.step == 2


def test_noisy_threshold_query_is_reproducible():
    state = sketch_vector(RAND, random_vector(7))

    a = robust_threshold_query(robust(noise=LaplaceNoise(3)), state)
    b = robust_threshold_query(robust(noise=LaplaceNoise(3)), state)
    assert a == b


def test_stable_update_enters_and_exits():
    key = int(WIDE_KEYS[0])
    rs = robust()
    srs = StableRobustState(SketchState.empty(RAND, CounterKind.INT64))

    robust_stable_update(rs, srs, (key, 100), candidates=[key])
    assert srs.stable.sign_of(key) is Sign.PLUS

    # 이탈한 갱신에서는 다시 진입하지 않음
    robust_stable_update(rs, srs, (key, -200), candidates=[key])
    assert srs.stable.sign_of(key) is None
    robust_stable_update(rs, srs, (key, 0), candidates=[key])
    assert srs.stable.sign_of(key) is Sign.MINUS
    assert srs.updates == 3


def test_stable_update_tracks_weights():
    key = int(WIDE_KEYS[0])
    rs = robust(weights=True)
    srs = StableRobustState(SketchState.empty(RAND, CounterKind.INT64))
    params = WeightEstimatorParams(W=300)

    robust_stable_update(rs, srs, (key, 100), report_weights=True, weight_params=params,
                         candidates=[key])
    assert srs.report().values == {key: 100.0}

    # 보고 중에는 갱신 값을 그대로 더하고 검증을 통과함
    robust_stable_update(rs, srs, (key, 5), report_weights=True, weight_params=params,
                         candidates=[key])
    assert srs.weights[key] == 105
    assert srs.validation_failures == 0
    # 가중치 추정을 쓰면 모니터의 L은 두 배
    assert rs.monitor.params.access_limit == 2000

    with pytest.raises(ValueError):
        robust_stable_update(rs, srs, (key, 1), report_weights=True)



def disjoint_keys_and_neighbor() -> tuple[int, int, int]:
    """버킷이 겹치지 않는 넓은 키 a, b와 b의 버킷에만 닿는 키 c"""
    buckets = {int(k): set(RAND.key_participation(int(k))[0].tolist()) for k in WIDE_KEYS}
    for a, b in itertools.combinations(buckets, 2):
        if buckets[a] & buckets[b]:
            continue
        for c in range(PARAMS.n):
            touched = set(RAND.key_participation(c)[0].tolist())
            if c not in (a, b) and touched & buckets[b] and not touched & buckets[a]:
                return a, b, c
    raise AssertionError("no disjoint key pair")


def test_stable_update_validates_only_touched_keys(monkeypatch):
    a, b, c = disjoint_keys_and_neighbor()
    validated = []

    def recording_validate(rs, srs, key, params):
        validated.append(key)
        return original(rs, srs, key, params)

    original = stable_module._validate  # pylint: disable=protected-access
    monkeypatch.setattr(stable_module, "_validate", recording_validate)
    rs = robust(weights=True)
    srs = StableRobustState(SketchState.empty(RAND, CounterKind.INT64))
    params = WeightEstimatorParams(W=300)

    def update(key, value):
        validated.clear()
        robust_stable_update(rs, srs, (key, value), report_weights=True, weight_params=params,
                             candidates=[a, b])
        return list(validated)

    update(a, 100)
    # b의 갱신은 a의 버킷에 닿지 않음
    assert update(b, 100) == [b]
    assert srs.stable.reported == {a, b}
    # c는 b와만 버킷을 공유
    assert update(c, 1) == [b]
    assert update(a, 5) == [a]
    assert srs.weights == {a: 105, b: 100}
    assert srs.validation_failures == 0


def test_fast_query_restricts_full_query_to_candidates():
    v = random_vector(11)
    fq = make_fast_query(robust(), filter_k=200)
    state, side_state = fq.sketch(v)

    candidates = fq.candidates(side_state)
    assert set(WIDE_KEYS[:2].tolist()) <= set(candidates.tolist())
    full = robust_threshold_query(robust(), state)
    # 잡음이 없으면 후보 밖의 키만 빠짐
    fast = fastquery_variant(fq, state, side_state)
    assert fast.keys == full.keys & set(candidates.tolist())
    assert set(WIDE_KEYS[:2].tolist()) <= fast.keys

    assert make_fast_query(robust(), filter_k=3).candidates(side_state).size <= 3


def test_lambda_number_uses_smaller_bound():
    acct = SequenceAccounting(b=1)
    acct.record_suspects([1, 2])
    acct.record_suspects([1])
    acct.record_suspects([1])

    # max = 3, 합/(C_a·b) = 4/50
    assert lambda_number(acct, EstimatorConstants()) == pytest.approx(0.08)
    acct_wide = SequenceAccounting(b=1, counts=acct.counts)
    assert lambda_number(acct_wide, EstimatorConstants(C_a=0.5)) == 3.0
    assert lambda_number(SequenceAccounting(b=1), EstimatorConstants()) == 0.0


def test_flip_number_skips_middle_band():
    # flip_high = 0.78, flip_low = 0.72
    trace = [0.9, 0.75, 0.5, 0.95, 0.99, 0.1]

    assert flip_number(trace, RELAXED) == 3
    assert flip_number([0.75, 0.74, 0.76], RELAXED) == 0

    acct = SequenceAccounting.from_flip_traces({1: trace, 2: [0.9]}, RELAXED, b=10)
    assert acct.counts == {1: 3, 2: 0}
    assert acct.steps == 6


def test_lambda_accounting_from_vectors():
    v = SparseVector.from_dict({0: 100, 1: 1})
    acct = SequenceAccounting.from_vectors([v, v], EstimatorConstants(), b=900)

    assert acct.counts[0] == 2 and acct.steps == 2


def test_useful_bucket_fraction():
    key = int(WIDE_KEYS[0])

    fractions = useful_bucket_fraction(RAND, [[key]] * 3, access_limit=2, keys=[key])
    assert fractions[key] == 1.0
    assert useful_bucket_fraction(RAND, [[key]], access_limit=2, keys=[key])[key] == 0.0


def test_transcript_rows():
    rs = robust(keep_transcript=True)
    rs.accounting = SequenceAccounting(PARAMS.b)
    rs.accounting.record_suspects([1, 2, 3])
    robust_threshold_query(rs, sketch_vector(RAND, random_vector(2)), candidates=range(50))

    rows = list(transcript_rows(rs))
    assert len(rows) == rs.monitor.queries
    assert all(tuple(row) == TRANSCRIPT_COLUMNS for row in rows)
    assert {row["answer"] for row in rows} <= {"top", "bottom"}
    assert all(row["lambda_q"] == pytest.approx(rs.lambda_trace[0]) for row in rows)
    assert {row["predicate"] for row in rows} <= {0, 1}


@pytest.mark.slow
def test_fast_query_is_ten_times_faster_on_large_domain():
    params = SketchParams(n=1_000_000, d=400, b=20)

    def fresh():
        # 참여 정보 캐시를 공유하지 않도록 매번 새 랜덤성
        return robust_init(init_sketch(SketchVariant.BCOUNT_SKETCH, params, seed=5), RELAXED,
                           1000, max_queries=10, epsilon=1.0, delta=1e-6)

    fast_rs, full_rs = fresh(), fresh()
    heavy = next(k for k in range(params.n) if fast_rs.rand.key_participation(k)[0].size >= 20)
    fq = make_fast_query(fast_rs, filter_k=10)
    state, side_state = fq.sketch(SparseVector.unit(heavy, 50))

    start = time.perf_counter()
    fast = fastquery_variant(fq, state, side_state)
    fast_seconds = time.perf_counter() - start
    start = time.perf_counter()
    full = robust_threshold_query(full_rs, state)
    full_seconds = time.perf_counter() - start

    assert fast.keys == full.keys == {heavy}
    assert full_seconds >= 10 * fast_seconds
