"""공격자와 추정기 사이의 경계

공격자 코드는 Oracle(벡터 → Report)만 알고 스케치 랜덤성에는 접근하지 않음.
분석가는 제너레이터로 작성되어 있어서 `report = yield query` 형태로 질의를 주고받음.
"""

from __future__ import annotations

from numbers import Integral
from typing import Callable, Generator, Optional, TypeVar

from robustsketch.errors import ProtocolError
from robustsketch.models.report import Report
from robustsketch.models.sparse_vector import SparseVector

Oracle = Callable[[SparseVector], Report]

T = TypeVar("T")
QueryProgram = Generator[SparseVector, Report, T]


def check_report(report: object, max_size: Optional[int] = None) -> Report:
    """오라클 응답 형식 확인

    Raises:
        ProtocolError: Report가 아니거나, 키가 정수가 아니거나, max_size보다 많을 때
    """
    if not isinstance(report, Report):
        raise ProtocolError(f"오라클 응답이 Report가 아닙니다: {type(report).__name__}")
    if not isinstance(report.keys, frozenset):
        raise ProtocolError("보고된 키는 frozenset이어야 합니다.")
    if any(not isinstance(key, Integral) or key < 0 for key in report.keys):
        raise ProtocolError("보고된 키는 0 이상의 정수여야 합니다.")
    if max_size is not None and len(report.keys) > max_size:
        raise ProtocolError(f"보고된 키가 {len(report.keys)}개로 상한 {max_size}개를 넘습니다.")
    if report.values is not None and not set(report.values) <= report.keys:
        raise ProtocolError("추정값이 보고되지 않은 키에 붙어 있습니다.")
    return report


def drive(program: QueryProgram[T], oracle: Oracle) -> T:
    """질의 제너레이터를 오라클로 끝까지 실행하고 반환값을 돌려줌"""
    try:
        query = next(program)
        while True:
            query = program.send(oracle(query))
    except StopIteration as stop:
        return stop.value


def oracle_interface(oracle: Oracle, v: SparseVector) -> frozenset[int]:
    """오라클에 v를 질의하고 보고된 키 집합만 돌려줌"""
    return check_report(oracle(v)).keys
