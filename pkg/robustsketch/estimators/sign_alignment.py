"""
부호 정렬(sign-alignment) 추정기.

버킷 추정값 μ_t[i]·c_t 중 부호가 σ와 일치하는 비율 p̂^σ 로 heavy 여부를 판단함.
- threshold_report: max(p̂⁺, p̂⁻) ≥ τ_m 인 키를 보고
- stable_step: τ_m1 / τ_m2 히스테리시스로 보고 집합을 유지
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from robustsketch.models.constants import EstimatorConstants
from robustsketch.models.report import Report
from robustsketch.models.sign import Sign
from robustsketch.sketch.randomness import SketchRandomness
from robustsketch.sketch.state import SketchState, bucket_estimates

logger = logging.getLogger(__name__)


def basic_p_hat(rand: SketchRandomness, state: SketchState, i: int, sigma: Sign) -> float:
    """p̂^σ = (b/d)·#{t : μ_t[i]·c_t·σ > 0}

    |T_i|가 아니라 d/b로 정규화하며, 곱이 0인 버킷은 어느 쪽에도 세지 않음.
    """
    values = bucket_estimates(rand, state, i)
    return float(np.count_nonzero(values * sigma.value > 0)) * rand.b / rand.d


def p_hat_all(rand: SketchRandomness, state: SketchState,
              keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """여러 키의 (p̂⁺, p̂⁻) 배열"""
    state.check(rand)
    part = rand.participation(keys)
    products = part.products(state.counters)
    scale = rand.b / rand.d
    plus = np.bincount(part.key_pos, weights=(products > 0), minlength=part.keys.size) * scale
    minus = np.bincount(part.key_pos, weights=(products < 0), minlength=part.keys.size) * scale
    return plus, minus


def _key_array(rand: SketchRandomness, candidates: Optional[Iterable[int]]) -> np.ndarray:
    if candidates is None:
        return np.arange(rand.n, dtype=np.int64)
    return np.unique(np.fromiter(candidates, dtype=np.int64))


def threshold_report(rand: SketchRandomness, state: SketchState,
                     constants: EstimatorConstants,
                     candidates: Optional[Iterable[int]] = None) -> Report:
    """max(p̂⁺, p̂⁻) ≥ τ_m 인 키 집합"""
    keys = _key_array(rand, candidates)
    plus, minus = p_hat_all(rand, state, keys)
    reported = keys[np.maximum(plus, minus) >= constants.tau_m]
    return Report(frozenset(reported.tolist()))


@dataclass
class StableReportState:
    """계속 보고 중인 키 집합

    Attributes:
        k_plus (set[int]): 양의 부호로 보고 중인 키
        k_minus (set[int]): 음의 부호로 보고 중인 키
        changes (Counter): 키별 소속 변경 횟수 (진입 + 이탈)
    """

    k_plus: set[int] = field(default_factory=set)
    k_minus: set[int] = field(default_factory=set)
    changes: Counter = field(default_factory=Counter)

    def __post_init__(self):
        if self.k_plus & self.k_minus:
            raise ValueError("K⁺와 K⁻는 서로소여야 합니다.")

    @property
    def reported(self) -> frozenset[int]:
        return frozenset(self.k_plus | self.k_minus)

    def members(self, sigma: Sign) -> set[int]:
        return self.k_plus if sigma is Sign.PLUS else self.k_minus

    def sign_of(self, key: int) -> Optional[Sign]:
        if key in self.k_plus:
            return Sign.PLUS
        if key in self.k_minus:
            return Sign.MINUS
        return None

    def enter(self, key: int, sigma: Sign) -> None:
        self.members(sigma).add(key)
        self.changes[key] += 1

    def exit(self, key: int) -> None:
        self.k_plus.discard(key)
        self.k_minus.discard(key)
        self.changes[key] += 1

    def report(self) -> Report:
        return Report(self.reported)


def stable_step(s: StableReportState, rand: SketchRandomness, state: SketchState,
                constants: EstimatorConstants,
                candidates: Optional[Iterable[int]] = None) -> StableReportState:
    """히스테리시스 규칙으로 보고 집합을 한 단계 갱신

    - 보고되지 않은 키: p̂^σ ≥ τ_m2 이면 K^σ에 진입 (두 부호 모두면 p̂가 큰 쪽, 같으면 +)
    - K^σ에 있는 키: p̂^σ < τ_m1 이면 이탈
    후보 밖이라도 이미 보고 중인 키는 항상 평가함.
    """
    keys = _key_array(rand, candidates)
    keys = np.union1d(keys, np.fromiter(s.reported, dtype=np.int64))
    plus, minus = p_hat_all(rand, state, keys)

    for key, p_plus, p_minus in zip(keys.tolist(), plus.tolist(), minus.tolist()):
        current = s.sign_of(key)
        if current is None:
            if max(p_plus, p_minus) >= constants.tau_m2:
                s.enter(key, Sign.PLUS if p_plus >= p_minus else Sign.MINUS)
                logger.debug("stable enter key=%d p+=%.3f p-=%.3f", key, p_plus, p_minus)
        else:
            p_sigma = p_plus if current is Sign.PLUS else p_minus
            if p_sigma < constants.tau_m1:
                s.exit(key)
                logger.debug("stable exit key=%d p=%.3f", key, p_sigma)
    return s
