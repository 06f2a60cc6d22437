"""
ThresholdMonitor: 원소별 접근 카운터를 가진 sparse-vector 방식 DP 메커니즘.

질의마다 "활성 원소 중 술어를 만족하는 개수"에 잡음을 더해 임계값과 비교함.
- ⊥: 상태 변화 없음
- ⊤: 술어를 만족한 활성 원소의 카운터를 1씩 올리고, L에 도달한 원소는 비활성화
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from robustsketch.dp.laplace import NoiseSource, ZeroNoise
from robustsketch.errors import SketchParameterError
from robustsketch.models.answer import Answer
from robustsketch.models.sign import Sign

logger = logging.getLogger(__name__)

# 잡음 크기 상한 κ·Δ·log(r/β) 의 상수 (보정 후 고정)
UTILITY_KAPPA = 12.0


@dataclass(frozen=True)
class PrivacyParams:
    """
    Attributes:
        epsilon (float): ε > 0
        delta (float): δ ∈ (0, 1)
        access_limit (int): 원소별 ⊤ 허용 횟수 L
    """

    epsilon: float
    delta: float
    access_limit: int

    def __post_init__(self):
        if self.epsilon <= 0:
            raise SketchParameterError("epsilon은 양수여야 합니다.")
        if not 0 < self.delta < 1:
            raise SketchParameterError("delta는 (0, 1) 범위여야 합니다.")
        if self.access_limit < 1:
            raise SketchParameterError("access_limit(L)은 1 이상이어야 합니다.")
        if self.Delta <= 0:
            raise SketchParameterError(
                f"(1/ε)·ln(1/δ) = {self.b_scale:.4g} 가 1 이하라서 Δ가 양수가 아닙니다."
            )

    @property
    def b_scale(self) -> float:
        """(1/ε)·ln(1/δ)"""
        return math.log(1 / self.delta) / self.epsilon

    @property
    def Delta(self) -> float:  # pylint: disable=invalid-name
        """Δ = (1/ε)·ln(1/δ)·ln((1/ε)·ln(1/δ))"""
        return self.b_scale * math.log(self.b_scale)

    @property
    def a_scale(self) -> float:
        return 10 * self.Delta

    def utility_bound(self, num_queries: int, beta: float, kappa: float = UTILITY_KAPPA) -> float:
        """r개 질의에서 확률 1-β 로 |잡음| 이 넘지 않는 크기"""
        return kappa * self.Delta * math.log(num_queries / beta)


@dataclass(frozen=True)
class QueryRecord:
    """질의 한 건의 기록"""

    query_id: int
    step: int
    key: int
    sign: int
    tau: float
    true_count: int
    noisy_count: float
    answer: Answer
    deactivated: int
    predicate: int = 0


@dataclass
class MonitorState:
    """ThresholdMonitor 상태

    Attributes:
        params (PrivacyParams): ε, δ, L
        noise (NoiseSource): 주입된 잡음 생성기
        counters (np.ndarray): 원소별 c(x)
        active (np.ndarray): c(x) < L 여부
        keep_transcript (bool): 질의 기록 보관 여부
    """

    params: PrivacyParams
    noise: NoiseSource = field(default_factory=ZeroNoise)
    counters: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    active: np.ndarray = field(default_factory=lambda: np.ones(0, dtype=bool))
    keep_transcript: bool = False
    transcript: list[QueryRecord] = field(default_factory=list)
    queries: int = 0
    tops: int = 0
    step: int = 0

    @property
    def num_elements(self) -> int:
        return int(self.counters.size)

    def _mask(self, f: np.ndarray) -> np.ndarray:
        """술어(인덱스 배열 또는 bool 마스크)를 활성 원소만 남긴 인덱스로 변환"""
        f = np.asarray(f)
        indices = np.flatnonzero(f) if f.dtype == bool else f.astype(np.int64)
        return indices[self.active[indices]]

    def active_count(self, f: np.ndarray) -> int:
        """f(S): 활성 원소 중 술어를 만족하는 개수"""
        return int(self._mask(f).size)

    def query(self, f: np.ndarray, s: Sign, tau: float, key: int = -1) -> Answer:
        """잡음 섞인 f(S)가 s 방향으로 τ를 넘으면 ⊤

        f̂ = f(S) + a + clip(b),  a ~ Lap(10Δ),  b ~ Lap((1/ε)ln(1/δ))
        clip은 s=+1 이면 min{Δ, b}, s=-1 이면 max{-Δ, b}.
        """
        satisfied = self._mask(f)
        true_count = int(satisfied.size)
        params = self.params
        a = self.noise.sample(params.a_scale)
        b = self.noise.sample(params.b_scale)
        clipped = min(params.Delta, b) if s is Sign.PLUS else max(-params.Delta, b)
        noisy = true_count + a + clipped
        self.queries += 1

        if noisy * s.value < tau * s.value:
            self._record(key, s, tau, true_count, noisy, Answer.BOTTOM, 0)
            return Answer.BOTTOM
        deactivated = self.charge(satisfied)
        self._record(key, s, tau, true_count, noisy, Answer.TOP, deactivated)
        return Answer.TOP

    def charge(self, satisfied: np.ndarray) -> int:
        """⊤ 응답의 비용 차감. 비활성화된 원소 수를 반환"""
        self.tops += 1
        self.counters[satisfied] += 1
        newly = satisfied[self.counters[satisfied] >= self.params.access_limit]
        self.active[newly] = False
        return int(newly.size)

    def commit(self, f: np.ndarray, s: Sign, tau: float, key: int = -1) -> int:
        """잡음 없이 ⊤ 결과를 반영 (분포를 직접 계산해서 ⊤ 지점을 정한 경우)"""
        satisfied = self._mask(f)
        self.queries += 1
        deactivated = self.charge(satisfied)
        self._record(key, s, tau, int(satisfied.size), math.nan, Answer.TOP, deactivated)
        return deactivated

    def noisy_offsets(self, size: int, s: Sign) -> np.ndarray:
        """질의 size 개 분량의 a + clip(b)"""
        params = self.params
        a = self.noise.samples(params.a_scale, size)
        b = self.noise.samples(params.b_scale, size)
        clipped = np.minimum(params.Delta, b) if s is Sign.PLUS else np.maximum(-params.Delta, b)
        return a + clipped

    def sequential_queries(self, groups: np.ndarray, num_groups: int,
                           predicates: list[np.ndarray], elements: np.ndarray,
                           s: Sign, tau: float,
                           group_keys: Optional[np.ndarray] = None) -> list[tuple[int, int]]:
        """그룹(키)마다 술어를 차례로 질의하고 처음 ⊤인 술어에서 멈추는 과정을 전체 그룹에 수행

        그룹 0, 1, ... 순서로 진행한 것과 같은 결과를 내되, ⊤가 나올 때까지는
        한 번에 벡터 연산으로 처리하고 ⊤ 이후의 그룹만 다시 계산함.

        Args:
            groups: 원소(버킷 참여)별 그룹 번호
            num_groups: 그룹 수
            predicates: 원소별 bool 마스크 목록 (그룹마다 이 순서로 질의)
            elements: 원소별 모니터 원소 인덱스 (버킷)
            s: 질의 방향
            tau: 임계값
            group_keys: 기록에 남길 그룹별 키 번호

        Returns:
            list[tuple[int, int]]: ⊤가 나온 (그룹 번호, 술어 번호) 목록
        """
        tops: list[tuple[int, int]] = []
        start = 0
        while start < num_groups:
            remaining = num_groups - start
            active = self.active[elements]
            counts = [np.bincount(groups, weights=(mask & active).astype(np.float64),
                                  minlength=num_groups)[start:]
                      for mask in predicates]
            answered = np.zeros(remaining, dtype=bool)
            chosen = np.full(remaining, -1)
            used = np.zeros(remaining, dtype=np.int64)
            noisy_all = []
            for j, count in enumerate(counts):
                noisy = count + self.noisy_offsets(remaining, s)
                noisy_all.append(noisy)
                pending = ~answered
                used[pending] += 1
                top = pending & (noisy * s.value >= tau * s.value)
                chosen[top] = j
                answered |= top

            hit = np.flatnonzero(answered)
            stop = int(hit[0]) if hit.size else remaining
            span = stop + 1 if hit.size else remaining
            if self.keep_transcript:
                query_id = self.queries
                for g in range(span):
                    key = int(group_keys[start + g]) if group_keys is not None else -1
                    for j in range(int(used[g])):
                        query_id += 1
                        answer = Answer.TOP if chosen[g] == j else Answer.BOTTOM
                        self.transcript.append(QueryRecord(
                            query_id, self.step, key, s.value, tau, int(counts[j][g]),
                            float(noisy_all[j][g]), answer, 0, j))
            self.queries += int(used[:span].sum())
            if not hit.size:
                break

            group = start + stop
            j = int(chosen[stop])
            satisfied = elements[(groups == group) & predicates[j] & active]
            deactivated = self.charge(satisfied)
            if deactivated and self.keep_transcript:
                self.transcript[-1] = replace(self.transcript[-1], deactivated=deactivated)
            tops.append((group, j))
            start = group + 1
        return tops

    def top_probability(self, true_count: int, s: Sign, tau: float) -> float:
        """주어진 f(S)에서 ⊤가 나올 정확한 확률"""
        params = self.params
        x = s.value * (tau - true_count)
        return self.noise.exceed_probability(x, params.a_scale, params.b_scale, params.Delta)

    def _record(self, key: int, s: Sign, tau: float, true_count: int, noisy: float,
                answer: Answer, deactivated: int) -> None:
        if deactivated:
            logger.debug("TM query %d deactivated %d elements", self.queries, deactivated)
        if self.keep_transcript:
            self.transcript.append(
                QueryRecord(self.queries, self.step, key, s.value, tau, true_count, noisy,
                            answer, deactivated)
            )


def tm_init(num_elements: int, epsilon: float, delta: float, access_limit: int,
            noise: Optional[NoiseSource] = None, keep_transcript: bool = False) -> MonitorState:
    """모든 카운터 0, 모든 원소 활성인 모니터 생성

    Raises:
        SketchParameterError: 파라미터가 유효하지 않을 때
    """
    if num_elements < 1:
        raise SketchParameterError("원소 개수는 1 이상이어야 합니다.")
    params = PrivacyParams(epsilon, delta, access_limit)
    return MonitorState(
        params=params,
        noise=noise if noise is not None else ZeroNoise(),
        counters=np.zeros(num_elements, dtype=np.int64),
        active=np.ones(num_elements, dtype=bool),
        keep_transcript=keep_transcript,
    )


def tm_query(m: MonitorState, f: np.ndarray, s: Sign, tau: float) -> Answer:
    return m.query(f, s, tau)
