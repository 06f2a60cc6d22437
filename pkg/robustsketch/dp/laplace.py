"""
Laplace 잡음 생성기.

ThresholdMonitor는 잡음 생성기를 주입받아 사용함.
- LaplaceNoise: 시드 고정 Laplace 잡음
- ZeroNoise: 잡음 없음 (제어 흐름 단위 테스트용)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from robustsketch.errors import SketchParameterError


def laplace_from_uniform(u: float, scale: float) -> float:
    """역 CDF 변환. u ∈ (0, 1), u = 0.5 이면 0"""
    centered = u - 0.5
    if centered == 0.0:
        return 0.0
    return -scale * math.copysign(1.0, centered) * math.log1p(-2.0 * abs(centered))


def sample_laplace(scale: float, rng: np.random.Generator) -> float:
    """Laplace(0, scale) 표본 하나"""
    if scale <= 0:
        raise SketchParameterError("scale은 양수여야 합니다.")
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return laplace_from_uniform(u, scale)


def laplace_survival(z: float, scale: float) -> float:
    """Pr[X ≥ z], X ~ Laplace(0, scale)"""
    if z >= 0:
        return 0.5 * math.exp(-z / scale)
    return 1.0 - 0.5 * math.exp(z / scale)


def _integrate_exp(log_coef: float, rate: float, lo: float, hi: float) -> float:
    """∫_lo^hi exp(log_coef + rate·y) dy (lo = -inf 이면 rate > 0)"""
    if math.isinf(lo):
        return math.exp(log_coef + rate * hi) / rate
    width = hi - lo
    if abs(rate * width) < 1e-12:
        return math.exp(log_coef + rate * lo) * width
    if rate > 0:
        return -math.exp(log_coef + rate * hi) * math.expm1(-rate * width) / rate
    return math.exp(log_coef + rate * lo) * math.expm1(rate * width) / rate


def clipped_sum_exceed(x: float, a_scale: float, b_scale: float, clip: float) -> float:
    """Pr[a + min(clip, b) ≥ x], a ~ Lap(a_scale), b ~ Lap(b_scale) 의 정확한 값

    b ≥ clip 인 부분은 점질량으로 처리하고, 나머지는 y = 0, y = x 에서 구간을 나누어
    지수함수 적분으로 계산함.
    """
    alpha, beta = a_scale, b_scale
    total = 0.5 * math.exp(-clip / beta) * laplace_survival(x - clip, alpha)

    points = sorted({p for p in (0.0, x) if p < clip})
    bounds = [-math.inf, *points, clip]
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if hi <= lo:
            continue
        mid = hi - 1.0 if math.isinf(lo) else (lo + hi) / 2
        below_x = mid <= x
        inv_a, inv_b = 1.0 / alpha, 1.0 / beta
        log_half_b = -math.log(2 * beta)
        log_quarter_b = -math.log(4 * beta)
        if mid < 0:
            if below_x:
                total += _integrate_exp(log_half_b, inv_b, lo, hi)
                total -= _integrate_exp(log_quarter_b - x * inv_a, inv_b + inv_a, lo, hi)
            else:
                total += _integrate_exp(log_quarter_b + x * inv_a, inv_b - inv_a, lo, hi)
        else:
            if below_x:
                total += _integrate_exp(log_half_b, -inv_b, lo, hi)
                total -= _integrate_exp(log_quarter_b - x * inv_a, inv_a - inv_b, lo, hi)
            else:
                total += _integrate_exp(log_quarter_b + x * inv_a, -(inv_a + inv_b), lo, hi)
    return min(1.0, max(0.0, total))


class NoiseSource(Protocol):
    """ThresholdMonitor에 주입되는 잡음 생성기"""

    def sample(self, scale: float) -> float:
        ...

    def samples(self, scale: float, size: int) -> np.ndarray:
        ...

    def uniform(self) -> float:
        """[0, 1) 균등 난수 (분포를 직접 계산하는 경로에서 사용)"""
        ...

    def exceed_probability(self, x: float, a_scale: float, b_scale: float, clip: float) -> float:
        """Pr[a + min(clip, b) ≥ x]"""
        ...


@dataclass
class LaplaceNoise:
    """시드 고정 Laplace 잡음"""

    seed: int = 0
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.rng = np.random.default_rng(self.seed)

    def sample(self, scale: float) -> float:
        return sample_laplace(scale, self.rng)

    def samples(self, scale: float, size: int) -> np.ndarray:
        u = self.rng.random(size)
        u[u == 0.0] = np.finfo(np.float64).tiny
        centered = u - 0.5
        return -scale * np.sign(centered) * np.log1p(-2.0 * np.abs(centered))

    def uniform(self) -> float:
        return float(self.rng.random())

    def exceed_probability(self, x: float, a_scale: float, b_scale: float, clip: float) -> float:
        return clipped_sum_exceed(x, a_scale, b_scale, clip)


@dataclass
class ZeroNoise:
    """잡음 없음. 질의 결과가 결정적"""

    def sample(self, scale: float) -> float:
        return 0.0

    def samples(self, scale: float, size: int) -> np.ndarray:
        return np.zeros(size)

    def uniform(self) -> float:
        return 0.5

    def exceed_probability(self, x: float, a_scale: float, b_scale: float, clip: float) -> float:
        return 1.0 if x <= 0 else 0.0
