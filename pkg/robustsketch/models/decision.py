"""공격자가 라운드마다 내리는 수집 결정 열거형"""

from enum import Enum, auto


class Decision(Enum):
    COLLECT_PLUS = auto()
    COLLECT_MINUS = auto()
    SKIP = auto()
