"""
게임 컨트롤러 클래스.

분석가(공격자)와 추정기 환경 사이의 질의/응답을 진행하고,
매 질의의 정답 여부와 편향 추적 결과를 기록합니다.
정답 판정과 편향 추적은 실제 랜덤성을 쓰는 평가 코드이며 분석가에게는 전달되지 않습니다.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from robustsketch.attacks.analyst import Analyst, AttackResult
from robustsketch.attacks.bnr import BiasTracker
from robustsketch.environment.environment import EstimatorEnvironment
from robustsketch.errors import EstimateUnavailableError
from robustsketch.estimators.oracles import heavy_and_suspect
from robustsketch.models.decision import Decision
from robustsketch.models.kinds import EstimatorKind
from robustsketch.models.report import Report
from robustsketch.models.sparse_vector import SparseVector

logger = logging.getLogger(__name__)

# 진행 상황을 INFO로 남기는 간격 (질의 수)
LOG_EVERY = 500


@dataclass(frozen=True)
class GameStep:
    """질의 하나의 기록"""

    step: int
    support: int
    reported: frozenset[int]
    correct: bool


@dataclass(frozen=True)
class RoundRow:
    """수집 라운드 하나의 평가 결과 (라운드 기록 CSV의 한 행)"""

    round: int
    collected: int
    norm_sq: float
    queries_used: int
    bnr_target: float = math.nan
    bnr_competitor: float = math.nan
    bnr_control: float = math.nan


def median_heavy_parameter(k_prime: int) -> float:
    """top-k' median 추정기가 모두 보고해야 하는 heavy hitter의 k (k' = 2k)"""
    return k_prime / 2


def judge(env: EstimatorEnvironment, v: SparseVector, report: Report) -> bool:
    """응답이 v에 대해 올바른지 판정

    - median: k'/2-heavy hitter가 모두 보고됨
    - 부호 정렬/강건: heavy ⊆ 보고 ⊆ heavy ∪ suspect
    """
    if env.kind is EstimatorKind.MEDIAN:
        k = median_heavy_parameter(env.k_prime)
        bound = v.tail_norm_sq(k) / k
        heavy = v.keys[v.values.astype(np.float64) ** 2 > bound]
        return all(key in report for key in heavy.tolist())
    heavy, allowed = heavy_and_suspect(v, env.constants, env.ground_truth().b)
    return heavy <= report.keys <= allowed


@dataclass
class Controller:
    """분석가와 환경 사이의 게임 진행

    Attributes:
        env (EstimatorEnvironment): 추정기 환경
        analyst (Analyst): 분석가
        max_rounds (int): 최대 질의 수
        tracker (BiasTracker): 편향 추적기 (없으면 BNR을 계산하지 않음)
        stop_when (Callable): 평가 쪽 종료 조건. 참이 되면 분석가에게 최종 단계로 넘어가라고 요청
        steps (list[GameStep]): 질의별 기록
        round_rows (list[RoundRow]): 수집 라운드별 기록
    """

    env: EstimatorEnvironment
    analyst: Analyst
    max_rounds: int = 1_000_000
    tracker: Optional[BiasTracker] = None
    stop_when: Optional[Callable[[Controller], bool]] = None

    steps: list[GameStep] = field(default_factory=list)
    round_rows: list[RoundRow] = field(default_factory=list)
    is_game_over: bool = False
    total_steps: int = 0

    def step(self, query: SparseVector) -> Report:
        """질의 하나를 환경에 전달하고 판정을 기록"""
        report = self.env.answer(query)
        correct = judge(self.env, query, report)
        self.steps.append(GameStep(self.total_steps, len(query), report.keys, correct))
        self.total_steps += 1
        self._track_rounds()
        if self.total_steps % LOG_EVERY == 0:
            self._log_game_state()
        return report

    def game_loop(self) -> list[GameStep]:
        """분석가가 끝나거나 max_rounds에 도달할 때까지 진행"""
        self.is_game_over = False
        program = self.analyst.program()
        try:
            query = next(program)
            while True:
                report = self.step(query)
                if self.stop_when is not None and not self.analyst.finishing and self.stop_when(self):
                    self.analyst.request_finish()
                if self.total_steps >= self.max_rounds:
                    logger.info("game stopped at max_rounds=%d", self.max_rounds)
                    program.close()
                    break
                query = program.send(report)
        except StopIteration:
            pass
        # 마지막 질의 뒤에 기록된 라운드
        self._track_rounds()
        self.is_game_over = True
        self._log_game_state()
        return self.steps

    def result(self) -> AttackResult:
        """분석가 결과에 평가 전용 BNR을 채워서 반환"""
        result = self.analyst.result()
        if self.tracker is not None:
            result = replace(result, measured_bnr=self._bnr(self.analyst.cfg.target_key))
        return result

    @property
    def final_correct(self) -> Optional[bool]:
        return self.steps[-1].correct if self.steps else None

    @property
    def correct_fraction(self) -> float:
        if not self.steps:
            return math.nan
        return sum(s.correct for s in self.steps) / len(self.steps)

    def current_bnr(self) -> float:
        if self.tracker is None or self.tracker.norm_sq == 0:
            return 0.0
        return self._bnr(self.analyst.cfg.target_key)

    def _bnr(self, key: Optional[int]) -> float:
        if key is None:
            return math.nan
        try:
            return self.tracker.bnr(key)
        except EstimateUnavailableError:
            return math.nan

    def _track_rounds(self) -> None:
        """분석가의 새 라운드 기록을 편향 추적기에 반영"""
        cfg = self.analyst.cfg
        for record in self.analyst.rounds[len(self.round_rows):]:
            row = RoundRow(record.round, record.collected, record.norm_sq, record.queries_used)
            if self.tracker is not None:
                if record.tail is not None:
                    self.tracker.add(record.tail)
                row = replace(
                    row,
                    bnr_target=self._bnr(cfg.target_key),
                    bnr_competitor=self._bnr(cfg.competitor_key),
                    bnr_control=self._bnr(cfg.control_key),
                )
            self.round_rows.append(row)

    def _log_game_state(self) -> None:
        collections = sum(1 for r in self.analyst.rounds if r.decision is not Decision.SKIP)
        logger.info("step %d: %d rounds, %d collections, correct %.3f, bnr %.3f",
                    self.total_steps, len(self.analyst.rounds), collections,
                    self.correct_fraction, self.current_bnr())


def game_loop(analyst: Analyst, env: EstimatorEnvironment, max_rounds: int,
              tracker: Optional[BiasTracker] = None) -> list[GameStep]:
    """analyst와 env로 게임을 진행하고 질의별 기록을 반환"""
    return Controller(env, analyst, max_rounds, tracker).game_loop()
