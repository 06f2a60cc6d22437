"""
불변 희소 벡터 객체.

- key → value 매핑을 정렬된 키 배열과 값 배열로 표현하며, 명시적인 0은 저장하지 않음.
- 덧셈/뺄셈/스칼라 곱 연산 시 새로운 SparseVector 인스턴스를 반환함.
- 값을 변경할 때는 배열을 직접 수정하지 말고, 반드시 연산 메서드를 사용할 것.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np


def _freeze(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class SparseVector:
    """v ∈ R^n 의 희소 표현

    Attributes:
        keys (np.ndarray): 오름차순, 중복 없는 키 (int64)
        values (np.ndarray): 키에 대응하는 0이 아닌 값 (int64 또는 float64)
    """

    keys: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        """정렬, 중복 키 합산, 0 제거 후 읽기 전용으로 고정"""
        keys = np.asarray(self.keys, dtype=np.int64).ravel()
        values = np.asarray(self.values).ravel()
        if values.dtype.kind == "b" or values.dtype.kind not in "iuf":
            if values.size:
                raise ValueError("값은 정수 또는 실수여야 합니다.")
            values = values.astype(np.int64)
        values = values.astype(np.float64 if values.dtype.kind == "f" else np.int64)
        if keys.shape != values.shape:
            raise ValueError("키와 값의 개수가 다릅니다.")
        if keys.size and keys.min() < 0:
            raise ValueError("키는 0 이상의 정수여야 합니다.")

        order = np.argsort(keys, kind="stable")
        keys, values = keys[order], values[order]
        if keys.size > 1 and np.any(keys[1:] == keys[:-1]):
            unique, inverse = np.unique(keys, return_inverse=True)
            summed = np.zeros(unique.size, dtype=values.dtype)
            np.add.at(summed, inverse, values)
            keys, values = unique, summed

        nonzero = values != 0
        object.__setattr__(self, "keys", _freeze(keys[nonzero].copy()))
        object.__setattr__(self, "values", _freeze(values[nonzero].copy()))

    # 생성자

    @classmethod
    def zeros(cls) -> SparseVector:
        return cls(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))

    @classmethod
    def unit(cls, key: int, weight: float | int = 1) -> SparseVector:
        """weight · e_key"""
        return cls(np.array([key]), np.array([weight]))

    @classmethod
    def from_dict(cls, entries: Mapping[int, float | int]) -> SparseVector:
        if not entries:
            return cls.zeros()
        return cls(np.fromiter(entries.keys(), dtype=np.int64, count=len(entries)),
                   np.array(list(entries.values())))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float | int]]) -> SparseVector:
        return cls.from_dict(dict(pairs))

    # 조회

    def __len__(self) -> int:
        return int(self.keys.size)

    def __contains__(self, key: int) -> bool:
        idx = np.searchsorted(self.keys, key)
        return bool(idx < self.keys.size and self.keys[idx] == key)

    def get(self, key: int, default: float | int = 0) -> float | int:
        idx = int(np.searchsorted(self.keys, key))
        if idx < self.keys.size and self.keys[idx] == key:
            return self.values[idx].item()
        return default

    def to_dict(self) -> dict[int, float | int]:
        return dict(zip(self.keys.tolist(), self.values.tolist()))

    @property
    def is_integral(self) -> bool:
        return self.values.dtype.kind == "i"

    @property
    def max_key(self) -> int:
        """가장 큰 키 (빈 벡터면 -1)"""
        return int(self.keys[-1]) if self.keys.size else -1

    # 노름

    def norm_sq(self) -> float:
        return float(np.dot(self.values.astype(np.float64), self.values.astype(np.float64)))

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def tail_norm_sq(self, k: float) -> float:
        """크기 상위 k개 항목을 0으로 바꾼 벡터의 제곱 노름 ‖v_tail[k]‖²

        k가 정수가 아니면 올림함.
        """
        drop = max(0, math.ceil(k))
        squares = np.sort(self.values.astype(np.float64) ** 2)[::-1]
        return float(squares[drop:].sum())

    def tail_norm(self, k: float) -> float:
        return math.sqrt(self.tail_norm_sq(k))

    # 연산 (항상 새 인스턴스 반환)

    def __add__(self, other: SparseVector) -> SparseVector:
        return SparseVector(np.concatenate([self.keys, other.keys]),
                            np.concatenate([self.values, other.values]))

    def __neg__(self) -> SparseVector:
        return SparseVector(self.keys, -self.values)

    def __sub__(self, other: SparseVector) -> SparseVector:
        return self + (-other)

    def scale(self, alpha: float | int) -> SparseVector:
        return SparseVector(self.keys, self.values * alpha)

    def __mul__(self, alpha: float | int) -> SparseVector:
        return self.scale(alpha)

    __rmul__ = __mul__

    def restrict(self, keys: Iterable[int]) -> SparseVector:
        """주어진 키만 남긴 벡터"""
        mask = np.isin(self.keys, np.fromiter(keys, dtype=np.int64))
        return SparseVector(self.keys[mask], self.values[mask])

    def without(self, keys: Iterable[int]) -> SparseVector:
        mask = ~np.isin(self.keys, np.fromiter(keys, dtype=np.int64))
        return SparseVector(self.keys[mask], self.values[mask])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return bool(np.array_equal(self.keys, other.keys)
                    and np.array_equal(self.values, other.values))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        preview = ", ".join(f"{k}: {v}" for k, v in list(self.to_dict().items())[:5])
        suffix = ", ..." if len(self) > 5 else ""
        return f"SparseVector({{{preview}{suffix}}}, nnz={len(self)})"
