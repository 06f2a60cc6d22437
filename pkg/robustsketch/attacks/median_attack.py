"""median 추정기(top-k') 공격

|H| = k'+1: 초대형 키 k'-1개와 같은 가중치의 경계 키 두 개(h, h2).
추정기는 초대형 키를 모두 보고하고 경계 키 중 하나만 보고하므로, 라운드마다
h가 보고되면 꼬리 z를, h2가 보고되면 -z를 수집함.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from robustsketch.attacks.analyst import Analyst, AttackConfig, AttackResult
from robustsketch.attacks.oracle import Oracle, QueryProgram, drive
from robustsketch.models.decision import Decision
from robustsketch.models.sparse_vector import SparseVector

# 초대형 키 가중치 = 경계 가중치 × SUPER_FACTOR
SUPER_FACTOR = 2
# swapped 최종 벡터에서 동반 키 가중치 = h 가중치 × COMPANION_FRACTION
COMPANION_FRACTION = 0.5


@dataclass
class MedianAttack(Analyst):
    """median 추정기 공격자"""

    @property
    def report_limit(self) -> Optional[int]:
        return self.cfg.k_prime

    def base_vector(self, weight: float) -> SparseVector:
        h = self.cfg.target_key
        w = int(round(weight))
        keys = np.arange(h, h + self.cfg.k_prime + 1, dtype=np.int64)
        values = np.full(keys.size, SUPER_FACTOR * w, dtype=np.int64)
        values[:2] = w
        return SparseVector(keys, values)

    def play_round(self, weight: float) -> QueryProgram[tuple[Decision, Optional[SparseVector]]]:
        tail = self.fresh_tail()
        report = yield from self.ask(self.base_vector(weight) + tail)
        if self.cfg.target_key in report and self.cfg.competitor_key not in report:
            return Decision.COLLECT_PLUS, tail
        if self.cfg.competitor_key in report and self.cfg.target_key not in report:
            return Decision.COLLECT_MINUS, tail
        return Decision.SKIP, tail

    def companions(self, weight: float) -> Optional[SparseVector]:
        """swapped: h를 뺀 H의 나머지 k'개를 h보다 작은 가중치로 다시 넣음"""
        if self.cfg.companions_role != "swapped":
            return None
        h = self.cfg.target_key
        keys = np.arange(h + 1, h + self.cfg.k_prime + 1, dtype=np.int64)
        return SparseVector(keys, np.full(keys.size, COMPANION_FRACTION * weight))


def attack_median(oracle: Oracle, cfg: AttackConfig) -> AttackResult:
    analyst = MedianAttack(cfg)
    drive(analyst.program(), oracle)
    return analyst.result()
