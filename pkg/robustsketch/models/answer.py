"""ThresholdMonitor 응답 열거형"""

from enum import Enum, auto


class Answer(Enum):
    TOP = auto()  # s 방향으로 임계값을 넘음 (예산이 차감됨)
    BOTTOM = auto()
