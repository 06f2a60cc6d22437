"""Bias-to-noise ratio 측정 (평가 전용, 실제 랜덤성을 사용함)

BNR(h) = median_{t ∈ T_h} ⟨μ_t, a⟩·μ_t[h]  /  √(‖a‖²/b)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from robustsketch.errors import EstimateUnavailableError
from robustsketch.models.sparse_vector import SparseVector
from robustsketch.models.variant import CounterKind
from robustsketch.sketch.randomness import SketchRandomness
from robustsketch.sketch.state import sketch_vector


def _ratio(rand: SketchRandomness, contributions: np.ndarray, key: int, norm_sq: float) -> float:
    buckets, signs = rand.key_participation(key)
    if buckets.size == 0:
        raise EstimateUnavailableError(f"키 {key}의 참여 버킷이 없습니다.")
    if norm_sq == 0:
        return 0.0
    bias = float(np.median(signs * contributions[buckets]))
    return bias / math.sqrt(norm_sq / rand.b)


def measure_bnr(rand: SketchRandomness, h: int, a: SparseVector) -> float:
    """a를 새로 스케치해서 h의 BNR 계산

    Raises:
        EstimateUnavailableError: T_h가 비어 있을 때
    """
    contributions = sketch_vector(rand, a, CounterKind.FLOAT64).counters
    return _ratio(rand, contributions, h, a.norm_sq())


@dataclass
class BiasTracker:
    """수집된 꼬리의 버킷별 기여 ⟨μ_t, a⟩를 누적해서 라운드마다 BNR을 계산

    Attributes:
        rand (SketchRandomness): 공격받는 스케치의 실제 랜덤성
        contributions (np.ndarray): 버킷별 누적 기여
        norm_sq (float): ‖a‖²
    """

    rand: SketchRandomness
    contributions: np.ndarray = field(init=False)
    norm_sq: float = 0.0

    def __post_init__(self):
        self.contributions = np.zeros(self.rand.d, dtype=np.float64)

    def add(self, tail: SparseVector) -> None:
        self.contributions += sketch_vector(self.rand, tail, CounterKind.FLOAT64).counters
        self.norm_sq += tail.norm_sq()

    def bnr(self, key: int) -> float:
        return _ratio(self.rand, self.contributions, key, self.norm_sq)

    def bucket_bias(self, key: int) -> np.ndarray:
        """T_h 버킷별 ⟨μ_t, a⟩·μ_t[h]"""
        buckets, signs = self.rand.key_participation(key)
        return signs * self.contributions[buckets]
