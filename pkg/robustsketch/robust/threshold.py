"""
강건 임계값 추정기.

부호 정렬 추정기의 각 키 판정을 ThresholdMonitor 질의로 바꾼 형태.
키 i마다 f⁺(t) = 1{μ_t[i]·c_t > 0}, f⁻(t) = 1{μ_t[i]·c_t < 0} 을 (d/b)·τ_m 에서 질의하고
f⁺가 ⊥일 때만 f⁻를 질의함.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from robustsketch.dp.laplace import NoiseSource, ZeroNoise
from robustsketch.dp.threshold_monitor import MonitorState, tm_init
from robustsketch.errors import SketchParameterError
from robustsketch.models.constants import EstimatorConstants
from robustsketch.models.report import Report
from robustsketch.models.sign import Sign
from robustsketch.models.variant import SketchVariant
from robustsketch.robust.accounting import SequenceAccounting, lambda_number
from robustsketch.sketch.randomness import Participation, SketchRandomness
from robustsketch.sketch.state import SketchState

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QueryDiagnostics:
    """질의 한 번의 진단 정보

    Attributes:
        step (int): 질의 번호
        keys_evaluated (int): 평가한 키 수
        reported (frozenset[int]): 보고된 키
        tm_queries (int): 이번에 사용한 TM 질의 수
        exhausted_keys (frozenset[int]): T_i의 모든 버킷이 비활성인 키
        inactive_fraction (dict[int, float]): 비활성 버킷 비율이 0보다 큰 키의 비율
    """

    step: int
    keys_evaluated: int
    reported: frozenset[int]
    tm_queries: int
    exhausted_keys: frozenset[int]
    inactive_fraction: dict[int, float] = field(default_factory=dict)


@dataclass
class RobustEstimatorState:
    """강건 추정기 상태

    Attributes:
        rand (SketchRandomness): BCountSketch 랜덤성
        monitor (MonitorState): d개 버킷 위의 ThresholdMonitor
        constants (EstimatorConstants): τ 상수
        access_limit (int): 사용자 지정 L (가중치 추정이 켜지면 모니터에는 2L)
        max_queries (int): 질의 수 상한 m
        accounting (SequenceAccounting): 평가 쪽에서 채우는 λ 기록 (없으면 None)
        diagnostics (list[QueryDiagnostics]): 질의별 진단
        lambda_trace (list[float]): 질의별 λ_Q 스냅샷 (accounting이 있을 때)
    """

    rand: SketchRandomness
    monitor: MonitorState
    constants: EstimatorConstants
    access_limit: int
    max_queries: int
    accounting: Optional[SequenceAccounting] = None
    diagnostics: list[QueryDiagnostics] = field(default_factory=list)
    lambda_trace: list[float] = field(default_factory=list)

    @property
    def ell(self) -> float:
        return self.rand.d / self.rand.b

    @property
    def step(self) -> int:
        return len(self.diagnostics)


def default_privacy(n: int, b: int, access_limit: int, max_queries: int,
                    c1: float = 1.0, c2: float = 1.0) -> tuple[float, float]:
    """(ε, δ) = (C1/√L, C2/(n·m·b·L))"""
    return c1 / math.sqrt(access_limit), c2 / (n * max_queries * b * access_limit)


def robust_init(rand: SketchRandomness, constants: EstimatorConstants, access_limit: int,
                max_queries: int, noise: Optional[NoiseSource] = None,
                c1: float = 1.0, c2: float = 1.0,
                epsilon: Optional[float] = None, delta: Optional[float] = None,
                weights: bool = False, keep_transcript: bool = False) -> RobustEstimatorState:
    """강건 추정기 초기화

    epsilon/delta를 지정하지 않으면 C1/√L, C2/(n·m·b·L) 을 사용함.
    탁상 규모 실험에서는 잡음이 신호를 압도하므로 명시적으로 지정할 수 있음.

    Args:
        rand: 스케치 랜덤성 (BCountSketch 권장)
        constants: τ 상수
        access_limit: L
        max_queries: m
        noise: 잡음 생성기 (기본 ZeroNoise)
        c1, c2: 기본 (ε, δ) 상수
        epsilon, delta: 명시적 프라이버시 파라미터
        weights: 가중치 추정 사용 여부 (모니터 L을 두 배로)
        keep_transcript: 질의 기록 보관 여부
    """
    if max_queries < 1:
        raise SketchParameterError("max_queries(m)는 1 이상이어야 합니다.")
    if rand.variant is not SketchVariant.BCOUNT_SKETCH:
        logger.warning("robust estimator is analysed for BCountSketch, got %s", rand.variant.value)
    default_eps, default_delta = default_privacy(rand.n, rand.b, access_limit, max_queries, c1, c2)
    monitor_limit = 2 * access_limit if weights else access_limit
    monitor = tm_init(rand.d, epsilon if epsilon is not None else default_eps,
                      delta if delta is not None else default_delta, monitor_limit,
                      noise if noise is not None else ZeroNoise(), keep_transcript)
    logger.debug("robust init L=%d eps=%.4g delta=%.3g Delta=%.4g", monitor_limit,
                 monitor.params.epsilon, monitor.params.delta, monitor.params.Delta)
    return RobustEstimatorState(rand, monitor, constants, access_limit, max_queries)


def _candidate_keys(rs: RobustEstimatorState, candidates: Optional[Iterable[int]]) -> np.ndarray:
    if candidates is None:
        return np.arange(rs.rand.n, dtype=np.int64)
    return rs.rand.check_keys(np.unique(np.fromiter(candidates, dtype=np.int64)))


def inactive_fractions(monitor: MonitorState, part: Participation) -> np.ndarray:
    """키별 T_i 중 비활성 버킷 비율 (T_i가 비면 0)"""
    counts = part.counts()
    inactive = np.bincount(part.key_pos,
                           weights=(~monitor.active[part.buckets]).astype(np.float64),
                           minlength=part.keys.size)
    return np.divide(inactive, counts, out=np.zeros(part.keys.size), where=counts > 0)


def robust_threshold_query(rs: RobustEstimatorState, state: SketchState,
                           candidates: Optional[Iterable[int]] = None) -> Report:
    """키마다 TM.query(f⁺, +1, (d/b)·τ_m) 또는 TM.query(f⁻, +1, (d/b)·τ_m) 가 ⊤이면 보고

    Args:
        rs: 강건 추정기 상태
        state: 같은 랜덤성으로 만든 스케치 상태
        candidates: 평가할 키 (기본: [n] 전체)

    Returns:
        Report: 보고된 키 집합. 진단은 rs.diagnostics에 쌓임
    """
    state.check(rs.rand)
    keys = _candidate_keys(rs, candidates)
    part = rs.rand.participation(keys)
    products = part.products(state.counters)
    before = rs.monitor.queries
    rs.monitor.step = rs.step

    tops = rs.monitor.sequential_queries(part.key_pos, keys.size, [products > 0, products < 0],
                                         part.buckets, Sign.PLUS, rs.ell * rs.constants.tau_m,
                                         group_keys=keys)
    reported = frozenset(int(keys[g]) for g, _ in tops)

    fractions = inactive_fractions(rs.monitor, part)
    counts = part.counts()
    exhausted = frozenset(keys[(counts > 0) & (fractions >= 1.0)].tolist())
    touched = np.flatnonzero(fractions > 0)
    diag = QueryDiagnostics(
        step=rs.step,
        keys_evaluated=int(keys.size),
        reported=reported,
        tm_queries=rs.monitor.queries - before,
        exhausted_keys=exhausted,
        inactive_fraction=dict(zip(keys[touched].tolist(), fractions[touched].tolist())),
    )
    rs.diagnostics.append(diag)
    if rs.accounting is not None:
        rs.lambda_trace.append(lambda_number(rs.accounting, rs.constants))
    if exhausted:
        logger.debug("robust query %d: %d keys exhausted", diag.step, len(exhausted))
    return Report(reported)

