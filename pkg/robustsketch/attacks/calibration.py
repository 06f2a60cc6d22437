"""경계 가중치 보정

새 꼬리로 탐색 질의를 SAMPLES번 해서 h가 보고되는 빈도가 [LOW, HIGH]에 들어오는 w를
이분 탐색으로 찾음. 상한을 모르면 두 배씩 늘리며 찾음.
"""

from __future__ import annotations

import logging

from robustsketch.attacks.analyst import Analyst, AttackConfig
from robustsketch.attacks.oracle import Oracle, QueryProgram, drive
from robustsketch.errors import CalibrationError
from robustsketch.models.kinds import EstimatorKind

logger = logging.getLogger(__name__)

SAMPLES = 50
LOW, HIGH = 0.25, 0.75
MAX_ITERATIONS = 30


def report_frequency(analyst: Analyst, weight: float, samples: int = SAMPLES) -> QueryProgram[float]:
    """가중치 weight에서 h가 보고되는 비율"""
    hits = 0
    for _ in range(samples):
        hits += yield from analyst.sample_query(weight)
    return hits / samples


def calibration_program(analyst: Analyst, initial: float,
                        samples: int = SAMPLES) -> QueryProgram[float]:
    """보고 빈도가 [LOW, HIGH]인 경계 가중치를 찾음

    Raises:
        CalibrationError: MAX_ITERATIONS 안에 찾지 못했을 때
    """
    low, high = 0.0, None
    weight = initial
    for iteration in range(MAX_ITERATIONS):
        frequency = yield from report_frequency(analyst, weight, samples)
        logger.debug("calibration %d: w=%.4g freq=%.2f", iteration, weight, frequency)
        if LOW <= frequency <= HIGH:
            return weight
        if frequency > HIGH:
            high = weight
        else:
            low = weight
        weight = 2 * weight if high is None else (low + high) / 2
    raise CalibrationError(f"{MAX_ITERATIONS}번 안에 경계 가중치를 찾지 못했습니다 (마지막 w={weight:.4g}).")


def calibrate_borderline(oracle: Oracle, cfg: AttackConfig) -> float:
    """cfg.estimator_kind에 맞는 탐색 질의로 경계 가중치를 보정"""
    # 순환 import 방지
    from robustsketch.attacks.median_attack import MedianAttack  # pylint: disable=import-outside-toplevel
    from robustsketch.attacks.sign_attack import SignAttack  # pylint: disable=import-outside-toplevel

    analyst = MedianAttack(cfg) if cfg.estimator_kind is EstimatorKind.MEDIAN else SignAttack(cfg)
    return drive(calibration_program(analyst, cfg.default_weight()), oracle)
