"""
부호 열거형.

각 값은 정수 +1/-1을 그대로 가지며, 버킷 추정값 μ_t[i]·c_t에 곱해
정렬(alignment) 여부를 판단할 때 사용함.
ex) PLUS는 μ_t[i]·c_t > 0 인 버킷을 센다.
"""

from __future__ import annotations

from enum import Enum


class Sign(Enum):
    """두 방향 부호. PLUS → +1, MINUS → -1"""

    PLUS = 1
    MINUS = -1

    @property
    def opposite(self) -> Sign:
        """반대 부호 반환"""
        return Sign.MINUS if self is Sign.PLUS else Sign.PLUS

    @classmethod
    def of(cls, value: int) -> Sign:
        """정수(+1/-1)를 Sign으로 변환. 0은 허용하지 않음"""
        if value > 0:
            return cls.PLUS
        if value < 0:
            return cls.MINUS
        raise ValueError("0에는 부호가 없습니다.")
