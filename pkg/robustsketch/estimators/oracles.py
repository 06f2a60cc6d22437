"""
검증용 오라클.

- oracle_p: 새 버킷 μ ~ B 를 i가 참여한다는 조건 하에 뽑아서 p^σ(v, i) 를 Monte Carlo로 추정
- classify_heavy_suspect: 정확한 꼬리 노름으로 heavy / suspect_only / neither 분류
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from robustsketch.errors import SketchParameterError
from robustsketch.models.constants import EstimatorConstants
from robustsketch.models.kinds import Label
from robustsketch.models.sign import Sign
from robustsketch.models.sparse_vector import SparseVector

# 한 번에 뽑는 기하분포 간격 개수
_GAP_CHUNK = 1 << 20
_SAMPLE_BATCH = 100_000


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Monte Carlo 추정값과 표준오차"""

    value: float
    stderr: float
    samples: int

    def within(self, target: float, sigmas: float = 5.0) -> bool:
        return abs(self.value - target) <= sigmas * max(self.stderr, 1e-12)


def bernoulli_positions(total: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """길이 total 의 독립 Bernoulli(p) 열에서 1인 위치를 기하분포 간격으로 생성"""
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)
    if p <= 0.0 or total == 0:
        return np.empty(0, dtype=np.int64)
    parts = []
    position = -1
    while True:
        gaps = rng.geometric(p, size=_GAP_CHUNK).astype(np.int64)
        chunk = position + np.cumsum(gaps)
        done = chunk >= total
        if done.any():
            parts.append(chunk[~done])
            break
        parts.append(chunk)
        position = int(chunk[-1])
    return np.concatenate(parts)


def sample_aligned(v: SparseVector, i: int, b: int, num_samples: int,
                   rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """i가 참여한다는 조건 하에 새 버킷의 (c·μ[i] > 0, c·μ[i] < 0) 여부를 표본 추출"""
    others = v.without([i])
    weight_i = float(v.get(i))
    sign_i = rng.choice(np.array([-1.0, 1.0]), size=num_samples)
    counters = sign_i * weight_i

    support = len(others)
    if support:
        hits = bernoulli_positions(num_samples * support, 1.0 / b, rng)
        sample_idx, key_idx = np.divmod(hits, support)
        signs = rng.choice(np.array([-1.0, 1.0]), size=hits.size)
        counters = counters + np.bincount(sample_idx, weights=signs * others.values[key_idx],
                                          minlength=num_samples)
    aligned = counters * sign_i
    return aligned > 0, aligned < 0


def oracle_p(v: SparseVector, i: int, sigma: Sign, num_samples: int, seed: int,
             b: int) -> MonteCarloEstimate:
    """p^σ(v, i) = Pr_μ[σ·⟨μ, v⟩·μ[i] > 0 | μ[i] ≠ 0] 의 Monte Carlo 추정

    Args:
        v: 입력 벡터
        i: 대상 키
        sigma: 부호
        num_samples: 표본 수
        seed: 난수 시드
        b: 폭 (다른 키의 참여 확률 1/b)
    """
    if num_samples < 1:
        raise SketchParameterError("num_samples는 1 이상이어야 합니다.")
    rng = np.random.default_rng(seed)
    count = 0
    for start in range(0, num_samples, _SAMPLE_BATCH):
        size = min(_SAMPLE_BATCH, num_samples - start)
        plus, minus = sample_aligned(v, i, b, size, rng)
        count += int(np.count_nonzero(plus if sigma is Sign.PLUS else minus))
    value = count / num_samples
    return MonteCarloEstimate(value, math.sqrt(value * (1 - value) / num_samples), num_samples)


def is_heavy_hitter(v: SparseVector, i: int, k: float) -> bool:
    """v[i]² > (1/k)·‖v_tail[k]‖²"""
    return float(v.get(i)) ** 2 > v.tail_norm_sq(k) / k


def classify_heavy_suspect(v: SparseVector, constants: EstimatorConstants,
                           b: int) -> dict[int, Label]:
    """supp(v)의 키를 분류 (supp 밖의 키는 모두 neither)

    - heavy: v[i]² > (C_b²/b)·‖v_tail[b/C_b²]‖²
    - neither: v[i]² ≤ (1/b)·‖v_tail[C_a·b]‖²
    - suspect_only: 그 외
    """
    heavy_bound = constants.C_b ** 2 / b * v.tail_norm_sq(b / constants.C_b ** 2)
    neither_bound = v.tail_norm_sq(constants.C_a * b) / b
    labels = {}
    for key, value in zip(v.keys.tolist(), v.values.tolist()):
        square = float(value) ** 2
        if square > heavy_bound:
            labels[key] = Label.HEAVY
        elif square <= neither_bound:
            labels[key] = Label.NEITHER
        else:
            labels[key] = Label.SUSPECT_ONLY
    return labels


def heavy_and_suspect(v: SparseVector, constants: EstimatorConstants,
                      b: int) -> tuple[frozenset[int], frozenset[int]]:
    """(heavy 키 집합, heavy 또는 suspect 키 집합)"""
    labels = classify_heavy_suspect(v, constants, b)
    heavy = frozenset(k for k, label in labels.items() if label is Label.HEAVY)
    allowed = frozenset(k for k, label in labels.items() if label is not Label.NEITHER)
    return heavy, allowed
