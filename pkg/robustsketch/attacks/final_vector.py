"""최종 공격 벡터 구성

수집한 꼬리 a는 h가 보고되는 쪽으로 편향되어 있음.
- mask_heavy: w·e_h - a. 새 랜덤성에서는 h가 heavy로 보고되지만 공격받은 랜덤성에서는 편향이 w를 지움
- fake_heavy: +a (w = 0). h가 supp에 없는데도 보고되기를 기대함
"""

from __future__ import annotations

import math
from typing import Optional

from robustsketch.models.kinds import FinalMode
from robustsketch.models.report import Report
from robustsketch.models.sparse_vector import SparseVector


def build_final_vector(a: SparseVector, h: int, w: float, mode: FinalMode,
                       companions: Optional[SparseVector] = None) -> SparseVector:
    """
    Args:
        a: 수집한 꼬리 (h ∉ supp(a))
        h: 목표 키
        w: mask_heavy에서 h의 가중치 (fake_heavy에서는 무시)
        mode: 최종 벡터 형태
        companions: 함께 넣을 키 (H의 나머지)

    Returns:
        SparseVector: 최종 질의 벡터
    """
    if h in a:
        raise ValueError("목표 키가 꼬리에 포함되어 있습니다.")
    if mode is FinalMode.MASK_HEAVY:
        final = SparseVector.unit(h, _as_weight(w)) - a
    else:
        final = a
    if companions is not None and len(companions):
        final = final + companions.without([h])
    return final


def _as_weight(w: float) -> float | int:
    """정수로 표현되는 가중치는 정수로 유지해서 정수 카운터를 쓸 수 있게 함"""
    return int(w) if float(w).is_integer() else float(w)


def mask_weight_from_report(report: Report, h: int, fraction: float, fallback: float) -> float:
    """a만 질의한 응답에서 h의 추정값을 읽어 mask 가중치로 사용

    값을 보고하지 않는 추정기이거나 h가 보고되지 않았으면 fallback.
    """
    if report.values is None or h not in report.values:
        return fallback
    bias = abs(float(report.values[h]))
    if bias == 0 or math.isnan(bias):
        return fallback
    return fraction * bias
