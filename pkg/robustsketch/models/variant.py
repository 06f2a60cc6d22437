"""스케치 종류와 해시 모드 열거형"""

from enum import Enum


class SketchVariant(Enum):
    """CountSketch: d/b 행 x b 버킷, BCountSketch: d개의 독립 버킷"""

    COUNT_SKETCH = "count_sketch"
    BCOUNT_SKETCH = "bcount_sketch"

    @property
    def code(self) -> int:
        """스냅샷에 기록되는 1바이트 코드"""
        return {SketchVariant.COUNT_SKETCH: 0, SketchVariant.BCOUNT_SKETCH: 1}[self]

    @classmethod
    def from_code(cls, code: int) -> "SketchVariant":
        for variant in cls:
            if variant.code == code:
                return variant
        raise ValueError(f"알 수 없는 스케치 코드입니다: {code}")


class HashMode(Enum):
    """polynomial: k-wise 독립 다항식 해시, fully_random: 키마다 독립인 메모이즈 해시"""

    POLYNOMIAL = "polynomial"
    FULLY_RANDOM = "fully_random"


class CounterKind(Enum):
    """버킷 카운터 저장 형식. 정수 입력의 비트 단위 정확성이 필요하면 INT64"""

    FLOAT64 = "float64"
    INT64 = "int64"

    @property
    def code(self) -> int:
        return {CounterKind.FLOAT64: 0, CounterKind.INT64: 1}[self]

    @property
    def dtype(self):
        return {CounterKind.FLOAT64: "<f8", CounterKind.INT64: "<i8"}[self]

    @classmethod
    def from_code(cls, code: int) -> "CounterKind":
        for kind in cls:
            if kind.code == code:
                return kind
        raise ValueError(f"알 수 없는 카운터 코드입니다: {code}")
