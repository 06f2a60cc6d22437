"""부호 정렬 추정기의 상수 묶음"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class EstimatorConstants:
    """heavy/suspect 판정 상수와 그로부터 파생되는 임계값

    기본값은 C_a = 50, C_b = 30, τ_a = 59/60, τ_b = 399/400 이다.
    τ_b - τ_a = 17/1200 으로 간격이 매우 좁아서, 실험에서는 relaxed()를 쓸 수 있다.

    Attributes:
        C_a (float): suspect 판정 꼬리 배수
        C_b (float): heavy 판정 폭 배수 (b = C_b^2 · k)
        tau_a (float): suspect 정렬 확률 하한
        tau_b (float): heavy 정렬 확률 하한
    """

    C_a: float = 50.0
    C_b: float = 30.0
    tau_a: float = 59 / 60
    tau_b: float = 399 / 400

    def __post_init__(self):
        if not 0.5 < self.tau_a < self.tau_b < 1:
            raise ValueError("1/2 < tau_a < tau_b < 1 을 만족해야 합니다.")
        if self.C_a <= 0 or self.C_b <= 0:
            raise ValueError("C_a, C_b는 양수여야 합니다.")

    @classmethod
    def relaxed(cls) -> EstimatorConstants:
        """탁상 규모 실험용 완화 상수"""
        return cls(tau_a=0.6, tau_b=0.9)

    @property
    def is_standard(self) -> bool:
        return self == EstimatorConstants()

    @property
    def gap(self) -> float:
        return self.tau_b - self.tau_a

    @property
    def tau_m(self) -> float:
        return (self.tau_a + self.tau_b) / 2

    @property
    def tau_m1(self) -> float:
        return self.tau_a + self.gap / 5

    @property
    def tau_m2(self) -> float:
        return self.tau_b - self.gap / 5

    @property
    def tau_delta_threshold(self) -> float:
        return self.gap / 10

    @property
    def tau_delta_stable(self) -> float:
        return self.gap / 25

    @property
    def flip_high(self) -> float:
        """flip number에서 high로 보는 하한"""
        return self.tau_b - 2 * self.gap / 5

    @property
    def flip_low(self) -> float:
        """flip number에서 low로 보는 상한"""
        return self.tau_a + 2 * self.gap / 5
