"""추정기/공격 관련 열거형 모음"""

from enum import Enum


class EstimatorKind(Enum):
    MEDIAN = "median"
    BASIC_SIGN = "basic"
    ROBUST = "robust"


class TailKind(Enum):
    """랜덤 꼬리 값의 분포. SIGN은 ±1, GAUSSIAN은 표준정규"""

    SIGN = "sign"
    GAUSSIAN = "gaussian"


class FinalMode(Enum):
    """최종 공격 벡터 형태

    - MASK_HEAVY: 진짜 heavy 키를 숨김 (w·e_h - a)
    - FAKE_HEAVY: 가벼운 키를 heavy로 보이게 함 (+a, w = 0)
    """

    MASK_HEAVY = "mask_heavy"
    FAKE_HEAVY = "fake_heavy"


class Label(Enum):
    """heavy / suspect 조건에 따른 키 분류"""

    HEAVY = "heavy"
    SUSPECT_ONLY = "suspect_only"
    NEITHER = "neither"
