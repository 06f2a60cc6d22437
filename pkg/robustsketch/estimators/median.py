"""
중앙값(분위수) 추정기.

키 i의 버킷 추정값 V(i)의 중앙값으로 v[i]를 추정하고,
추정값 절댓값이 가장 큰 k' 개의 키를 보고함.
"""

from __future__ import annotations

import warnings
from typing import Iterable, Optional

import numpy as np

from robustsketch.errors import EstimateUnavailableError, SketchParameterError
from robustsketch.models.report import Report
from robustsketch.models.variant import SketchVariant
from robustsketch.sketch.randomness import SketchRandomness
from robustsketch.sketch.state import SketchState, bucket_estimates


def quantile_estimate(rand: SketchRandomness, state: SketchState, i: int, q: float) -> float:
    """V(i)의 q 분위수 (선형 보간, q=0.5면 짝수 개일 때 가운데 두 값의 평균)

    Raises:
        EstimateUnavailableError: T_i가 비어 있을 때
    """
    if not 0.0 <= q <= 1.0:
        raise SketchParameterError("q는 [0, 1] 범위여야 합니다.")
    values = bucket_estimates(rand, state, i)
    if values.size == 0:
        raise EstimateUnavailableError(f"키 {i}가 참여하는 버킷이 없습니다.")
    return float(np.quantile(values.astype(np.float64), q))


def median_estimate(rand: SketchRandomness, state: SketchState, i: int) -> float:
    return quantile_estimate(rand, state, i, 0.5)


def quantile_all(rand: SketchRandomness, state: SketchState, keys: np.ndarray,
                 q: float = 0.5) -> np.ndarray:
    """여러 키의 분위수 추정값을 한 번에 계산. T_i가 빈 키는 NaN"""
    state.check(rand)
    part = rand.participation(keys)
    products = part.products(state.counters).astype(np.float64)
    if rand.variant is SketchVariant.COUNT_SKETCH:
        # 모든 키가 정확히 d/b 개 버킷에 참여
        return np.quantile(products.reshape(part.keys.size, -1), q, axis=1) \
            if part.keys.size else np.empty(0)
    padded = part.padded(products)
    if padded.shape[1] == 0:
        return np.full(part.keys.size, np.nan)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # All-NaN slice
        return np.nanquantile(padded, q, axis=1)


def median_topk(rand: SketchRandomness, state: SketchState, k_prime: int,
                candidates: Optional[Iterable[int]] = None) -> Report:
    """|중앙값 추정값|이 큰 k' 개의 키와 추정값

    동점이면 키 번호가 작은 쪽을 먼저 고름. T_i가 빈 키는 후보에서 제외.

    Args:
        rand: 스케치 랜덤성
        state: 스케치 상태
        k_prime: 보고할 키 개수
        candidates: 평가할 키 (기본: [n] 전체)
    """
    if k_prime < 1:
        raise SketchParameterError("k_prime은 1 이상이어야 합니다.")
    keys = (np.arange(rand.n, dtype=np.int64) if candidates is None
            else np.unique(np.fromiter(candidates, dtype=np.int64)))
    estimates = quantile_all(rand, state, keys)
    available = ~np.isnan(estimates)
    keys, estimates = keys[available], estimates[available]
    order = np.lexsort((keys, -np.abs(estimates)))[:k_prime]
    chosen = keys[order]
    return Report(frozenset(chosen.tolist()),
                  dict(zip(chosen.tolist(), estimates[order].tolist())))
