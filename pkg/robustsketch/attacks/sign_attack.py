"""기본 부호 정렬 추정기 공격

H = {h}. 라운드마다 w·e_h + z 와 w·e_h - z 를 모두 질의하고,
h가 정확히 한 번 보고되었으면 그때의 꼬리(z 또는 -z)를 수집함.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from robustsketch.attacks.analyst import Analyst, AttackConfig, AttackResult
from robustsketch.attacks.calibration import calibration_program
from robustsketch.attacks.oracle import Oracle, QueryProgram, drive
from robustsketch.models.decision import Decision
from robustsketch.models.sparse_vector import SparseVector


@dataclass
class SignAttack(Analyst):
    """기본 부호 정렬 추정기 공격자"""

    round_cost = 2

    def prepare(self) -> QueryProgram[float]:
        if not self.cfg.calibrate:
            return self.cfg.default_weight()
        return (yield from calibration_program(self, self.cfg.default_weight()))

    def play_round(self, weight: float) -> QueryProgram[tuple[Decision, Optional[SparseVector]]]:
        tail = self.fresh_tail()
        base = self.base_vector(weight)
        plus = self.cfg.target_key in (yield from self.ask(base + tail))
        minus = self.cfg.target_key in (yield from self.ask(base - tail))
        if plus and not minus:
            return Decision.COLLECT_PLUS, tail
        if minus and not plus:
            return Decision.COLLECT_MINUS, tail
        return Decision.SKIP, tail


def attack_basic_sign(oracle: Oracle, cfg: AttackConfig) -> AttackResult:
    analyst = SignAttack(cfg)
    drive(analyst.program(), oracle)
    return analyst.result()
