"""해시 패밀리와 스케치 파라미터 정의"""

from __future__ import annotations

from dataclasses import dataclass

from robustsketch.errors import SketchParameterError
from robustsketch.models.variant import HashMode, SketchVariant

MERSENNE_PRIME = (1 << 61) - 1


@dataclass(frozen=True)
class HashFamilySpec:
    """k-wise 독립 해시 패밀리 명세

    Attributes:
        independence (int): 다항식 계수 개수 k (k-wise 독립)
        domain_bits (int): 키 범위 [0, 2^domain_bits)
        mode (HashMode): polynomial 또는 fully_random
        prime (int): 다항식 해시의 소수 모듈러스 (기본 2^61 - 1)
    """

    independence: int = 2
    domain_bits: int = 32
    mode: HashMode = HashMode.POLYNOMIAL
    prime: int = MERSENNE_PRIME

    def __post_init__(self):
        """생성 후 제약조건 검증"""
        if self.independence < 2:
            raise SketchParameterError("independence는 2 이상이어야 합니다.")
        if not 1 <= self.domain_bits <= 61:
            raise SketchParameterError("domain_bits는 1..61 범위여야 합니다.")
        if self.prime < (1 << self.domain_bits):
            raise SketchParameterError("prime은 2^domain_bits 이상이어야 합니다.")
        if self.prime != MERSENNE_PRIME and self.prime >= (1 << 32):
            raise SketchParameterError("2^61-1 이외의 소수는 2^32 미만만 지원합니다.")

    @property
    def key_limit(self) -> int:
        return 1 << self.domain_bits


@dataclass(frozen=True)
class SketchParams:
    """(n, d, b) 스케치 파라미터

    Attributes:
        n (int): 입력 차원 (키는 [0, n))
        d (int): 버킷(측정) 개수
        b (int): 폭 (width)
    """

    n: int
    d: int
    b: int

    def __post_init__(self):
        if self.n < 1:
            raise SketchParameterError("n은 1 이상이어야 합니다.")
        if not 1 <= self.b <= self.d:
            raise SketchParameterError("1 <= b <= d 를 만족해야 합니다.")

    @property
    def ell(self) -> float:
        """d/b (CountSketch의 행 개수, BCountSketch의 기대 |T_i|)"""
        return self.d / self.b

    @property
    def rows(self) -> int:
        return self.d // self.b

    def validate_for(self, variant: SketchVariant) -> None:
        """스케치 종류별 추가 제약 검증"""
        if variant is SketchVariant.COUNT_SKETCH and self.d % self.b != 0:
            raise SketchParameterError(
                f"CountSketch는 b가 d를 나누어야 합니다 (d={self.d}, b={self.b})."
            )
