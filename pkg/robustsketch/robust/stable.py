"""
강건 stable 추정기 (스트리밍 갱신).

갱신마다 스케치를 고치고 ThresholdMonitor 질의로 보고 집합을 유지함.
- 보고 중인 K^σ 의 키: TM.query(f^σ, -1, (d/b)·τ_m1) 가 ⊤이면 이탈
- 보고되지 않은 키: TM.query(f^σ, +1, (d/b)·τ_m2) 가 ⊤이면 K^σ 에 진입 (+ 먼저, ⊥일 때만 -)
가중치를 보고할 때는 진입 시 새로 추정하고, 보고 중에는 갱신 값을 정확히 더하며,
보고 전에 τ_down / τ_up 분위 질의 쌍으로 유지 중인 추정값을 검증함 (갱신된 키와 버킷을 공유하는 키만).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from robustsketch.estimators.sign_alignment import StableReportState
from robustsketch.models.answer import Answer
from robustsketch.models.report import Report
from robustsketch.models.sign import Sign
from robustsketch.robust.threshold import RobustEstimatorState
from robustsketch.robust.weight import WeightEstimatorParams, weight_estimate_fast
from robustsketch.sketch.state import SketchState, apply_update

logger = logging.getLogger(__name__)


@dataclass
class StableRobustState:
    """stable 추정기의 가변 상태

    Attributes:
        state (SketchState): 누적 스케치 (정수 카운터)
        stable (StableReportState): K⁺, K⁻
        weights (dict[int, int]): 보고 중인 키의 유지 가중치
        validation_failures (int): 검증에서 다시 추정한 횟수
        updates (int): 처리한 갱신 수
    """

    state: SketchState
    stable: StableReportState = field(default_factory=StableReportState)
    weights: dict[int, int] = field(default_factory=dict)
    validation_failures: int = 0
    updates: int = 0

    def report(self) -> Report:
        reported = self.stable.reported
        values = {k: float(w) for k, w in self.weights.items() if k in reported}
        return Report(reported, values or None)


def _validate(rs: RobustEstimatorState, srs: StableRobustState, key: int,
              params: WeightEstimatorParams) -> bool:
    """유지 중인 추정값 ŵ가 여전히 잡음 섞인 분위 사이에 있는지 확인. 실패하면 False

    - #{t : μ_t[i]·c_t ≤ ŵ} ≤ (d/b)·τ_down 이면 ŵ가 너무 작음
    - #{t : μ_t[i]·c_t ≤ ŵ-1} ≥ (d/b)·τ_up 이면 ŵ가 너무 큼
    """
    buckets, signs = rs.rand.key_participation(key)
    values = signs.astype(np.int64) * srs.state.counters[buckets]
    estimate = srs.weights[key]
    monitor = rs.monitor
    if monitor.query(buckets[values <= estimate], Sign.MINUS,
                     rs.ell * params.tau_down, key=key) is Answer.TOP:
        return False
    if monitor.query(buckets[values <= estimate - 1], Sign.PLUS,
                     rs.ell * params.tau_up, key=key) is Answer.TOP:
        return False
    return True


def robust_stable_update(rs: RobustEstimatorState, srs: StableRobustState,
                         update: tuple[int, int], report_weights: bool = False,
                         weight_params: Optional[WeightEstimatorParams] = None,
                         candidates: Optional[Iterable[int]] = None) -> StableRobustState:
    """갱신 하나를 반영하고 보고 집합(과 가중치)을 갱신

    Args:
        rs: 강건 추정기 상태 (stable 임계값 τ_m1, τ_m2 사용)
        srs: stable 상태
        update: (키, 값)
        report_weights: 가중치 유지 여부
        weight_params: 가중치 추정 파라미터 (report_weights일 때 필수)
        candidates: 진입을 검사할 키 (기본: [n] 전체)

    Returns:
        StableRobustState: 갱신된 같은 객체
    """
    if report_weights and weight_params is None:
        raise ValueError("report_weights에는 weight_params가 필요합니다.")
    key, value = update
    apply_update(srs.state, rs.rand, key, value)
    if key in srs.weights:
        srs.weights[key] += int(value)
    srs.updates += 1
    rs.monitor.step = srs.updates

    stable = srs.stable
    counters = srs.state.counters
    ell = rs.ell
    constants = rs.constants

    # 이탈: K^σ 의 키마다 f^σ 를 아래 방향으로 질의
    reported = np.array(sorted(stable.reported), dtype=np.int64)
    if reported.size:
        part = rs.rand.participation(reported)
        products = part.products(counters)
        key_signs = np.array([stable.sign_of(int(k)).value for k in reported])
        aligned = products * key_signs[part.key_pos] > 0
        tops = rs.monitor.sequential_queries(part.key_pos, reported.size, [aligned],
                                             part.buckets, Sign.MINUS, ell * constants.tau_m1,
                                             group_keys=reported)
        for g, _ in tops:
            leaving = int(reported[g])
            stable.exit(leaving)
            srs.weights.pop(leaving, None)
            logger.debug("stable exit key=%d at update %d", leaving, srs.updates)

    # 진입: 이번 갱신 전에 보고되지 않았던 키
    keys = (np.arange(rs.rand.n, dtype=np.int64) if candidates is None
            else np.unique(np.fromiter(candidates, dtype=np.int64)))
    keys = np.setdiff1d(keys, reported, assume_unique=True)
    if keys.size:
        part = rs.rand.participation(keys)
        products = part.products(counters)
        tops = rs.monitor.sequential_queries(part.key_pos, keys.size,
                                             [products > 0, products < 0], part.buckets,
                                             Sign.PLUS, ell * constants.tau_m2, group_keys=keys)
        for g, j in tops:
            entering = int(keys[g])
            stable.enter(entering, Sign.PLUS if j == 0 else Sign.MINUS)
            if report_weights:
                srs.weights[entering] = weight_estimate_fast(rs, srs.state, entering, weight_params)
            logger.debug("stable enter key=%d at update %d", entering, srs.updates)

    if report_weights:
        touched = rs.rand.key_participation(key)[0]
        for k in sorted(stable.reported):
            if k not in srs.weights:
                srs.weights[k] = weight_estimate_fast(rs, srs.state, k, weight_params)
                continue
            # 카운터가 바뀐 키만 다시 검증
            if k != key and not np.intersect1d(rs.rand.key_participation(k)[0], touched).size:
                continue
            if not _validate(rs, srs, k, weight_params):
                srs.validation_failures += 1
                srs.weights[k] = weight_estimate_fast(rs, srs.state, k, weight_params)
    return srs
