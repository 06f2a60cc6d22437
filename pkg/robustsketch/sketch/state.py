"""버킷 카운터 c_t = ⟨μ_t, v⟩ 와 스케치 연산"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from robustsketch.errors import SketchParameterError
from robustsketch.models.sparse_vector import SparseVector
from robustsketch.models.variant import CounterKind
from robustsketch.sketch.randomness import SketchRandomness

logger = logging.getLogger(__name__)


@dataclass
class SketchState:
    """d개의 버킷 카운터

    Attributes:
        counters (np.ndarray): c_t (float64 또는 정확한 int64)
        fingerprint (tuple): 만들어진 SketchRandomness의 식별값
    """

    counters: np.ndarray
    fingerprint: tuple = field(default=())

    @property
    def kind(self) -> CounterKind:
        return CounterKind.INT64 if self.counters.dtype.kind == "i" else CounterKind.FLOAT64

    @classmethod
    def empty(cls, rand: SketchRandomness, kind: CounterKind = CounterKind.FLOAT64) -> SketchState:
        return cls(np.zeros(rand.d, dtype=kind.dtype), rand.fingerprint)

    def copy(self) -> SketchState:
        return SketchState(self.counters.copy(), self.fingerprint)

    def check(self, rand: SketchRandomness) -> None:
        """이 상태가 rand로 만들어졌는지 확인"""
        if self.fingerprint and self.fingerprint != rand.fingerprint:
            raise SketchParameterError("다른 랜덤성으로 만들어진 스케치 상태입니다.")


def sketch_vector(rand: SketchRandomness, v: SparseVector,
                  kind: Optional[CounterKind] = None) -> SketchState:
    """c_t = Σ_{i ∈ supp(v)} μ_t[i]·v[i]

    키별 참여 버킷만 열거해서 희소 측정 행렬을 만들고 곱함.

    Args:
        rand: 스케치 랜덤성
        v: 입력 벡터
        kind: 카운터 형식 (기본: 정수 벡터면 INT64, 아니면 FLOAT64)
    """
    if kind is None:
        kind = CounterKind.INT64 if v.is_integral else CounterKind.FLOAT64
    if kind is CounterKind.INT64 and not v.is_integral:
        raise SketchParameterError("정수 카운터에는 정수 벡터만 스케치할 수 있습니다.")

    state = SketchState.empty(rand, kind)
    if len(v) == 0:
        return state
    part = rand.participation(v.keys)
    values = v.values.astype(state.counters.dtype)
    state.counters[:] = part.matrix(rand.d).tocsr() @ values
    return state


def apply_update(state: SketchState, rand: SketchRandomness, key: int,
                 delta: float | int) -> SketchState:
    """v ← v + delta·e_key 에 해당하도록 카운터를 제자리에서 갱신

    Returns:
        SketchState: 갱신된 같은 객체
    """
    state.check(rand)
    if state.kind is CounterKind.INT64 and not float(delta).is_integer():
        raise SketchParameterError("정수 카운터에는 정수 갱신만 허용됩니다.")
    buckets, signs = rand.key_participation(key)
    if buckets.size:
        state.counters[buckets] += signs.astype(state.counters.dtype) * state.counters.dtype.type(delta)
    return state


def bucket_estimates(rand: SketchRandomness, state: SketchState, i: int) -> np.ndarray:
    """V(i) = {μ_t[i]·c_t | t ∈ T_i}, T_i 버킷 오름차순"""
    state.check(rand)
    buckets, signs = rand.key_participation(i)
    return signs * state.counters[buckets]
