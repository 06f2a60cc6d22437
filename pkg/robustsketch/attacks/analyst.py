"""분석가(공격자) 기반 클래스와 공용 도구

분석가는 다음 상태를 유지함:
- 공격 설정과 자체 난수 생성기 (꼬리 생성용)
- 꼬리 키를 겹치지 않게 나눠주는 KeyArena
- 수집한 꼬리의 합 a
- 라운드별 결정 기록과 사용한 질의 수

라운드 진행은 program() 제너레이터가 담당하고, 하위 클래스는 라운드 하나(play_round)만 구현함.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Generator, Optional

import numpy as np

from robustsketch.attacks.final_vector import build_final_vector, mask_weight_from_report
from robustsketch.attacks.oracle import QueryProgram, check_report
from robustsketch.models.decision import Decision
from robustsketch.models.kinds import EstimatorKind, FinalMode, TailKind
from robustsketch.models.report import Report
from robustsketch.models.sparse_vector import SparseVector

logger = logging.getLogger(__name__)

COMPANION_ROLES = ("appendix", "swapped")


@dataclass(frozen=True)
class AttackConfig:
    """공격 설정

    Attributes:
        target_key (int): 목표 키 h
        bnr (float): 목표 bias-to-noise ratio (평가 쪽 종료 조건에 사용)
        rounds (int): 수집 목표 r
        tail_size (int): 라운드별 꼬리 크기 m
        k_prime (int): median 추정기의 보고 개수
        b (int): 스케치 폭
        ell (float): d/b
        borderline_weight (float): 탐색 중 h의 가중치 (None이면 기본값 또는 보정)
        estimator_kind (EstimatorKind): 공격 대상 추정기
        tail_kind (TailKind): ±1 또는 가우시안 꼬리
        final_mode (FinalMode): 최종 벡터 형태 (None이면 median은 mask, 나머지는 fake)
        companions_role (str): "appendix" 또는 "swapped" (median 최종 벡터에 동반 키 추가)
        mask_fraction (float): mask 가중치 = 탐침으로 읽은 편향 × mask_fraction
        mask_weight (float): mask 가중치 직접 지정 (None이면 탐침 사용)
        repeats (int): robust 공격에서 팔마다 반복할 질의 수 (None이면 ⌈ℓ⌉)
        max_queries (int): 전체 질의 예산 (None이면 rounds만으로 종료)
        calibrate (bool): 경계 가중치를 오라클로 보정할지 여부
        seed (int): 공격자 난수 시드
    """

    target_key: int = 0
    bnr: float = 1.0
    rounds: int = 100
    tail_size: int = 3000
    k_prime: int = 10
    b: int = 30
    ell: float = 100.0
    borderline_weight: Optional[float] = None
    estimator_kind: EstimatorKind = EstimatorKind.MEDIAN
    tail_kind: TailKind = TailKind.SIGN
    final_mode: Optional[FinalMode] = None
    companions_role: str = "appendix"
    mask_fraction: float = 1.0
    mask_weight: Optional[float] = None
    repeats: Optional[int] = None
    max_queries: Optional[int] = None
    calibrate: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.target_key < 0:
            raise ValueError("target_key는 0 이상이어야 합니다.")
        if self.bnr <= 0:
            raise ValueError("bnr은 양수여야 합니다.")
        if self.rounds < 0:
            raise ValueError("rounds는 0 이상이어야 합니다.")
        if self.tail_size < 1:
            raise ValueError("tail_size(m)는 1 이상이어야 합니다.")
        if self.k_prime < 1 or self.b < 1 or self.ell <= 0:
            raise ValueError("k_prime, b는 1 이상, ell은 양수여야 합니다.")
        if self.companions_role not in COMPANION_ROLES:
            raise ValueError(f"companions_role은 {COMPANION_ROLES} 중 하나여야 합니다.")
        if self.mask_fraction <= 0:
            raise ValueError("mask_fraction은 양수여야 합니다.")
        if self.repeats is not None and self.repeats < 1:
            raise ValueError("repeats는 1 이상이어야 합니다.")

    @property
    def special_keys(self) -> tuple[int, ...]:
        """H: median은 (h, h2, 초대형 키 k'-1개), 부호 정렬 추정기는 (h,)"""
        h = self.target_key
        if self.estimator_kind is EstimatorKind.MEDIAN:
            return tuple(range(h, h + self.k_prime + 1))
        return (h,)

    @property
    def competitor_key(self) -> Optional[int]:
        """median 공격에서 h와 경쟁하는 같은 가중치의 키"""
        if self.estimator_kind is EstimatorKind.MEDIAN:
            return self.target_key + 1
        return None

    @property
    def control_key(self) -> int:
        """어떤 질의에도 등장하지 않는 대조 키"""
        return max(self.special_keys) + 1

    @property
    def arena_start(self) -> int:
        return self.control_key + 1

    @property
    def repeat_count(self) -> int:
        return self.repeats if self.repeats is not None else math.ceil(self.ell)

    @property
    def resolved_final_mode(self) -> FinalMode:
        if self.final_mode is not None:
            return self.final_mode
        if self.estimator_kind is EstimatorKind.MEDIAN:
            return FinalMode.MASK_HEAVY
        return FinalMode.FAKE_HEAVY

    @property
    def tail_std(self) -> float:
        """꼬리 하나가 버킷에 주는 기여의 표준편차 √(m/b)"""
        return math.sqrt(self.tail_size / self.b)

    def default_weight(self) -> float:
        """경계 가중치 초기값. median은 꼬리 키보다 확실히 큰 정수, 부호 정렬은 √(m/b)"""
        if self.borderline_weight is not None:
            return self.borderline_weight
        if self.estimator_kind is EstimatorKind.MEDIAN:
            return float(math.ceil(10 * self.tail_std))
        return self.tail_std


@dataclass(frozen=True)
class RoundRecord:
    """수집 라운드 하나의 기록 (평가 쪽이 tail로 편향을 추적함)"""

    round: int
    decision: Decision
    norm_sq: float
    queries_used: int
    tail: Optional[SparseVector] = None

    @property
    def collected(self) -> int:
        return {Decision.COLLECT_PLUS: 1, Decision.COLLECT_MINUS: -1, Decision.SKIP: 0}[self.decision]


@dataclass(frozen=True)
class AttackResult:
    """
    Attributes:
        a (SparseVector): 수집한 꼬리의 합 (h ∉ supp(a))
        collected (tuple[Decision, ...]): 라운드별 결정
        queries_used (int): 사용한 질의 수
        measured_bnr (float): 평가 전용 BNR (분석가는 채우지 않음)
        final_vector (SparseVector): 최종 공격 벡터 (최종 단계 전이면 None)
        success (bool): 최종 질의에서 공격자가 관찰한 실패 여부
        borderline_weight (float): 탐색에 사용한 h의 가중치
    """

    a: SparseVector
    collected: tuple[Decision, ...]
    queries_used: int
    final_vector: Optional[SparseVector] = None
    success: bool = False
    measured_bnr: float = math.nan
    borderline_weight: float = math.nan

    @property
    def collections(self) -> int:
        return sum(1 for d in self.collected if d is not Decision.SKIP)


@dataclass
class KeyArena:
    """H 위쪽부터 겹치지 않는 꼬리 키 구간을 차례로 나눠줌"""

    next_key: int

    def take(self, size: int) -> np.ndarray:
        keys = np.arange(self.next_key, self.next_key + size, dtype=np.int64)
        self.next_key += size
        return keys


@dataclass
class TailCollector:
    """수집한 꼬리의 합 a. 꼬리 키가 서로 겹치지 않으므로 조각을 이어 붙이기만 함"""

    keys: list[np.ndarray] = field(default_factory=list)
    values: list[np.ndarray] = field(default_factory=list)
    norm_sq: float = 0.0
    _vector: Optional[SparseVector] = field(default=None, repr=False)

    def collect(self, tail: SparseVector) -> None:
        self.keys.append(tail.keys)
        self.values.append(tail.values)
        self.norm_sq += tail.norm_sq()
        self._vector = None

    def vector(self) -> SparseVector:
        if self._vector is None:
            if self.keys:
                self._vector = SparseVector(np.concatenate(self.keys), np.concatenate(self.values))
            else:
                self._vector = SparseVector.zeros()
        return self._vector


@dataclass
class Analyst:
    """적응형 분석가의 공통 동작

    Attributes:
        cfg (AttackConfig): 공격 설정
        collector (TailCollector): 수집한 꼬리
        rounds (list[RoundRecord]): 라운드 기록
        queries_used (int): 사용한 질의 수
        weight (float): 탐색에 사용하는 h의 가중치
        finishing (bool): 수집을 멈추고 최종 단계로 넘어가라는 요청 여부
    """

    cfg: AttackConfig
    collector: TailCollector = field(default_factory=TailCollector)
    rounds: list[RoundRecord] = field(default_factory=list)
    queries_used: int = 0
    weight: float = math.nan
    finishing: bool = False
    final_vector: Optional[SparseVector] = None
    success: bool = False
    rng: np.random.Generator = field(init=False, repr=False)
    arena: KeyArena = field(init=False)

    # 라운드 하나에 드는 질의 수
    round_cost = 1

    def __post_init__(self):
        self.rng = np.random.default_rng(self.cfg.seed)
        self.arena = KeyArena(self.cfg.arena_start)

    @property
    def report_limit(self) -> Optional[int]:
        """한 번의 응답에 허용되는 최대 키 수"""
        return None

    @property
    def collections(self) -> int:
        return sum(1 for r in self.rounds if r.decision is not Decision.SKIP)

    def request_finish(self) -> None:
        """현재 라운드를 마치고 최종 단계로 넘어가도록 요청"""
        self.finishing = True

    def ask(self, v: SparseVector) -> Generator[SparseVector, Report, Report]:
        """질의 하나. `report = yield from self.ask(v)`"""
        report = yield v
        self.queries_used += 1
        return check_report(report, self.report_limit)

    def fresh_tail(self) -> SparseVector:
        """처음 쓰는 키 m개 위의 ±1 (또는 가우시안) 꼬리"""
        keys = self.arena.take(self.cfg.tail_size)
        if self.cfg.tail_kind is TailKind.GAUSSIAN:
            values = self.rng.standard_normal(keys.size)
        else:
            values = self.rng.choice(np.array([-1, 1], dtype=np.int64), size=keys.size)
        return SparseVector(keys, values)

    def base_vector(self, weight: float) -> SparseVector:
        """탐색 질의의 고정 부분 (꼬리 제외)"""
        return SparseVector.unit(self.cfg.target_key, weight)

    def sample_query(self, weight: float) -> Generator[SparseVector, Report, bool]:
        """새 꼬리 하나로 탐색 질의를 한 번 하고 h가 보고되었는지 반환"""
        report = yield from self.ask(self.base_vector(weight) + self.fresh_tail())
        return self.cfg.target_key in report

    def prepare(self) -> QueryProgram[float]:
        """탐색에 쓸 h의 가중치 결정 (기본: 보정 없음)"""
        return self.cfg.default_weight()
        yield  # pylint: disable=unreachable

    def play_round(self, weight: float) -> QueryProgram[tuple[Decision, Optional[SparseVector]]]:
        """라운드 하나를 진행하고 (결정, 그 라운드의 꼬리)를 반환"""
        raise NotImplementedError

    def record(self, decision: Decision, tail: Optional[SparseVector]) -> None:
        """결정에 따라 꼬리를 수집하고 라운드를 기록"""
        handlers = {
            Decision.COLLECT_PLUS: lambda z: z,
            Decision.COLLECT_MINUS: lambda z: -z,
            Decision.SKIP: lambda z: None,
        }
        collected = handlers[decision](tail) if tail is not None else None
        if collected is not None:
            self.collector.collect(collected)
        self.rounds.append(RoundRecord(len(self.rounds), decision, self.collector.norm_sq,
                                       self.queries_used, collected))

    def final_cost(self) -> int:
        return 2 if self.cfg.resolved_final_mode is FinalMode.MASK_HEAVY else 1

    def can_continue(self) -> bool:
        if self.finishing or self.collections >= self.cfg.rounds:
            return False
        if self.cfg.max_queries is None:
            return True
        return self.queries_used + self.round_cost + self.final_cost() <= self.cfg.max_queries

    def companions(self, weight: float) -> Optional[SparseVector]:
        """최종 벡터에 함께 넣을 키 (기본: 없음)"""
        return None

    def finish(self) -> QueryProgram[None]:
        """최종 벡터를 만들어 질의하고 공격 성공 여부를 기록"""
        cfg = self.cfg
        a = self.collector.vector()
        mode = cfg.resolved_final_mode
        weight = 0.0
        if mode is FinalMode.MASK_HEAVY:
            weight = cfg.mask_weight if cfg.mask_weight is not None else self.weight
            if cfg.mask_weight is None:
                # 확인 질의: a만 질의해서 h에 쌓인 편향을 읽음 (값을 보고하는 추정기만)
                report = yield from self.ask(a)
                weight = mask_weight_from_report(report, cfg.target_key, cfg.mask_fraction, weight)
        final = build_final_vector(a, cfg.target_key, weight, mode, self.companions(weight))
        self.final_vector = final
        report = yield from self.ask(final)
        reported = cfg.target_key in report
        self.success = not reported if mode is FinalMode.MASK_HEAVY else reported
        logger.info("attack finished: %d collections, %d queries, success=%s",
                    self.collections, self.queries_used, self.success)

    def program(self) -> QueryProgram[None]:
        """준비 → 수집 라운드 → 최종 질의"""
        self.weight = yield from self.prepare()
        while self.can_continue():
            decision, tail = yield from self.play_round(self.weight)
            self.record(decision, tail)
            logger.debug("round %d: %s (|a|²=%.0f, queries=%d)", len(self.rounds) - 1,
                         decision.name, self.collector.norm_sq, self.queries_used)
        yield from self.finish()

    def result(self) -> AttackResult:
        return AttackResult(
            a=self.collector.vector(),
            collected=tuple(r.decision for r in self.rounds),
            queries_used=self.queries_used,
            final_vector=self.final_vector,
            success=self.success,
            borderline_weight=self.weight,
        )


@dataclass
class NullAnalyst(Analyst):
    """응답을 보지 않고 고정된 형태의 무작위 벡터만 질의하는 비적응 분석가

    질의마다 heavy_keys개의 뚜렷한 heavy 키(가중치 heavy_weight, 부호 무작위)와 새 꼬리를 넣음.
    """

    heavy_keys: int = 3
    heavy_weight: Optional[float] = None

    def base_vector(self, weight: float) -> SparseVector:
        keys = np.arange(self.cfg.target_key, self.cfg.target_key + self.heavy_keys)
        signs = self.rng.choice(np.array([-1, 1], dtype=np.int64), size=keys.size)
        return SparseVector(keys, signs * int(round(weight)))

    def prepare(self) -> QueryProgram[float]:
        if self.heavy_weight is not None:
            return self.heavy_weight
        return float(math.ceil(10 * self.cfg.tail_std))
        yield  # pylint: disable=unreachable

    def play_round(self, weight: float) -> QueryProgram[tuple[Decision, Optional[SparseVector]]]:
        yield from self.ask(self.base_vector(weight) + self.fresh_tail())
        return Decision.SKIP, None

    def final_cost(self) -> int:
        return 0

    def can_continue(self) -> bool:
        if self.finishing or len(self.rounds) >= self.cfg.rounds:
            return False
        return self.cfg.max_queries is None or self.queries_used < self.cfg.max_queries

    def finish(self) -> QueryProgram[None]:
        return
        yield  # pylint: disable=unreachable
