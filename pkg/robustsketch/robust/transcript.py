"""강건 추정기의 질의 기록을 CSV 행으로 변환"""

from __future__ import annotations

import math
from typing import Iterator

from robustsketch.robust.threshold import RobustEstimatorState

TRANSCRIPT_SCHEMA = "robust_transcript"
TRANSCRIPT_VERSION = 1
TRANSCRIPT_COLUMNS = (
    "step",
    "query_id",
    "key",
    "direction",
    "predicate",
    "threshold",
    "true_count",
    "noisy_count",
    "answer",
    "deactivated",
    "lambda_q",
)


def transcript_rows(rs: RobustEstimatorState) -> Iterator[dict]:
    """monitor.transcript 의 각 TM 질의를 한 행으로

    predicate는 같은 키에 대해 몇 번째로 질의한 술어인지 (임계값 질의에서 0은 f⁺, 1은 f⁻).
    lambda_q는 해당 step의 λ_Q 스냅샷 (기록이 없으면 빈 칸).
    """
    for record in rs.monitor.transcript:
        lam = rs.lambda_trace[record.step] if record.step < len(rs.lambda_trace) else None
        yield {
            "step": record.step,
            "query_id": record.query_id,
            "key": record.key,
            "direction": record.sign,
            "predicate": record.predicate,
            "threshold": round(record.tau, 6),
            "true_count": record.true_count,
            "noisy_count": "" if math.isnan(record.noisy_count) else round(record.noisy_count, 6),
            "answer": "top" if record.answer.name == "TOP" else "bottom",
            "deactivated": record.deactivated,
            "lambda_q": "" if lam is None else round(lam, 6),
        }
