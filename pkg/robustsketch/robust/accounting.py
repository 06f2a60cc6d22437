"""
질의 열의 적응성 예산 계산.

- λ-number: 키별 suspect 등장 횟수 λ_{Q,i} 로부터
  λ_Q = min{ max_i λ_{Q,i}, (1/(C_a·b))·Σ_i λ_{Q,i} }
- flip number: p(v_q, i) 가 low ↔ high 사이를 오간 횟수 (중간 구간은 건너뜀)
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from robustsketch.estimators.oracles import heavy_and_suspect
from robustsketch.models.constants import EstimatorConstants
from robustsketch.models.sparse_vector import SparseVector
from robustsketch.sketch.randomness import SketchRandomness


@dataclass
class SequenceAccounting:
    """키별 카운트 λ_{Q,i}

    Attributes:
        b (int): 스케치 폭 (정규화 C_a·b 에 사용)
        counts (Counter): 키별 카운트 (threshold: suspect 횟수, stable: flip number)
        steps (int): 반영된 질의 수
    """

    b: int
    counts: Counter = field(default_factory=Counter)
    steps: int = 0

    def record_suspects(self, keys: Iterable[int]) -> None:
        """질의 하나에서 suspect(heavy 포함)였던 키들을 반영"""
        self.counts.update(keys)
        self.steps += 1

    def record_vector(self, v: SparseVector, constants: EstimatorConstants) -> None:
        _, allowed = heavy_and_suspect(v, constants, self.b)
        self.record_suspects(allowed)

    @classmethod
    def from_vectors(cls, vectors: Iterable[SparseVector], constants: EstimatorConstants,
                     b: int) -> SequenceAccounting:
        acct = cls(b)
        for v in vectors:
            acct.record_vector(v, constants)
        return acct

    @classmethod
    def from_flip_traces(cls, traces: dict[int, Sequence[float]], constants: EstimatorConstants,
                         b: int) -> SequenceAccounting:
        """키별 p 추적값으로부터 stable 변형의 카운트(flip number) 구성"""
        acct = cls(b)
        for key, trace in traces.items():
            acct.counts[key] = flip_number(trace, constants)
        acct.steps = max((len(t) for t in traces.values()), default=0)
        return acct


def lambda_number(acct: SequenceAccounting, constants: EstimatorConstants) -> float:
    if not acct.counts:
        return 0.0
    largest = max(acct.counts.values())
    normalized = sum(acct.counts.values()) / (constants.C_a * acct.b)
    return float(min(largest, normalized))


def flip_number(p_trace: Sequence[float], constants: EstimatorConstants) -> int:
    """low ↔ high 전이 횟수

    high: p ≥ τ_b - (2/5)(τ_b - τ_a), low: p ≤ τ_a + (2/5)(τ_b - τ_a)
    """
    flips = 0
    last = None
    for p in p_trace:
        if p >= constants.flip_high:
            level = "high"
        elif p <= constants.flip_low:
            level = "low"
        else:
            continue
        if last is not None and level != last:
            flips += 1
        last = level
    return flips


def bucket_loads(rand: SketchRandomness, suspect_sets: Iterable[Iterable[int]]) -> np.ndarray:
    """버킷별 누적 suspect 부하: Σ_q #{i ∈ suspect(q) : t ∈ T_i}"""
    loads = np.zeros(rand.d, dtype=np.int64)
    for keys in suspect_sets:
        keys = np.fromiter(keys, dtype=np.int64)
        if keys.size:
            part = rand.participation(keys)
            loads += np.bincount(part.buckets, minlength=rand.d)
    return loads


def useful_bucket_fraction(rand: SketchRandomness, suspect_sets: Iterable[Iterable[int]],
                           access_limit: int, keys: Iterable[int]) -> dict[int, float]:
    """키별로 T_i 중 부하가 L을 넘는 (유용하지 않은) 버킷의 비율"""
    loads = bucket_loads(rand, suspect_sets)
    result = {}
    for key in keys:
        buckets, _ = rand.key_participation(key)
        result[key] = float(np.mean(loads[buckets] > access_limit)) if buckets.size else 0.0
    return result
