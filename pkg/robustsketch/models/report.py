"""추정기가 돌려주는 응답 객체. 불변이며, 수정되지 않고 새로 생성됨."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional


@dataclass(frozen=True)
class Report:
    """
    공격자가 관찰할 수 있는 유일한 정보
    - keys: 보고된 키 집합
    - values: 추정값 (값을 보고하는 추정기만, 없으면 None)
    """

    keys: frozenset[int] = frozenset()
    values: Optional[Mapping[int, float]] = field(default=None, compare=False)

    def __contains__(self, key: int) -> bool:
        return key in self.keys

    def __len__(self) -> int:
        return len(self.keys)
