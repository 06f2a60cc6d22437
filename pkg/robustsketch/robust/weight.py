"""
ThresholdMonitor 기반 가중치 추정.

naive: w = -W, ..., W 순서로 f_{≤w}(t) = 1{t ∈ T_i ∧ μ_t[i]·c_t ≤ w} 를 (d/b)·τ_tr 에서
질의하고 처음 ⊤가 나온 w를 반환 (없으면 W).

fast: f_{≤w}는 버킷 값 사이에서 변하지 않으므로 [-W, W]를 술어가 같은 구간으로 나누고,
구간마다 ⊤ 확률 p를 정확히 계산해서 naive와 같은 분포로 결과를 뽑음.
- 구간 [L, R]을 통째로 건너뛸 확률: (1-p)^(R-L+1)
- 건너뛰지 않으면 w = L + j, Pr[j] ∝ (1-p)^j·p  (j = 0..R-L)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from robustsketch.errors import SketchParameterError
from robustsketch.models.answer import Answer
from robustsketch.models.sign import Sign
from robustsketch.robust.threshold import RobustEstimatorState
from robustsketch.sketch.state import SketchState

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WeightEstimatorParams:
    """
    Attributes:
        W (int): 입력 값의 절댓값 상한
        tau_down (float): 하한 분위 (기본 1/10)
        tau_up (float): 상한 분위 (기본 9/10)
    """

    W: int  # pylint: disable=invalid-name
    tau_down: float = 0.1
    tau_up: float = 0.9

    def __post_init__(self):
        if self.W < 1:
            raise SketchParameterError("W는 1 이상이어야 합니다.")
        if not 0 < self.tau_down < self.tau_up < 1:
            raise SketchParameterError("0 < tau_down < tau_up < 1 을 만족해야 합니다.")

    @property
    def tau_tr(self) -> float:
        return (self.tau_down + self.tau_up) / 2


def _signed_values(rs: RobustEstimatorState, state: SketchState,
                   i: int) -> tuple[np.ndarray, np.ndarray]:
    """(T_i 버킷, 버킷별 μ_t[i]·c_t)"""
    state.check(rs.rand)
    if state.counters.dtype.kind != "i":
        raise SketchParameterError("가중치 추정은 정수 카운터가 필요합니다.")
    buckets, signs = rs.rand.key_participation(i)
    return buckets, signs.astype(np.int64) * state.counters[buckets]


def weight_estimate_naive(rs: RobustEstimatorState, state: SketchState, i: int,
                          params: WeightEstimatorParams) -> int:
    """w = -W..W 를 차례로 질의해서 처음 ⊤인 w (없으면 W)"""
    buckets, values = _signed_values(rs, state, i)
    tau = rs.ell * params.tau_tr
    for w in range(-params.W, params.W + 1):
        if rs.monitor.query(buckets[values <= w], Sign.PLUS, tau, key=i) is Answer.TOP:
            return w
    return params.W


def _intervals(values: np.ndarray, low: int, high: int) -> list[tuple[int, int]]:
    """[low, high]를 #{values ≤ w} 가 일정한 구간들로 분할"""
    cuts = np.unique(values[(values > low) & (values <= high)]).tolist()
    starts = [low, *cuts]
    ends = [c - 1 for c in cuts] + [high]
    return list(zip(starts, ends))


def _truncated_geometric(p: float, length: int, u: float) -> int:
    """Pr[j] ∝ (1-p)^j·p, j ∈ [0, length) 의 역 CDF 표본"""
    if p >= 1.0:
        return 0
    log_q = math.log1p(-p)
    mass = -math.expm1(length * log_q)  # 1 - (1-p)^length
    j = math.floor(math.log1p(-u * mass) / log_q)
    return min(max(j, 0), length - 1)


def weight_estimate_fast(rs: RobustEstimatorState, state: SketchState, i: int,
                         params: WeightEstimatorParams) -> int:
    """naive와 같은 분포를 구간 단위로 계산. 비용은 W와 무관하게 O(|T_i|)개 구간"""
    buckets, values = _signed_values(rs, state, i)
    monitor = rs.monitor
    tau = rs.ell * params.tau_tr
    active_values = values[monitor.active[buckets]]

    for start, end in _intervals(values, -params.W, params.W):
        length = end - start + 1
        count = int(np.count_nonzero(active_values <= start))
        p = monitor.top_probability(count, Sign.PLUS, tau)
        if p <= 0.0:
            continue
        skip = math.exp(length * math.log1p(-p)) if p < 1.0 else 0.0
        if monitor.noise.uniform() < skip:
            continue
        w = start + _truncated_geometric(p, length, monitor.noise.uniform())
        monitor.commit(buckets[values <= w], Sign.PLUS, tau, key=i)
        return w
    return params.W
