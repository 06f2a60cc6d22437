"""강건 추정기 공격

응답에 잡음이 섞이므로 꼬리 z마다 ±z 각각을 repeats(기본 ⌈ℓ⌉)번 질의해서 보고 빈도를 추정하고,
빈도가 높은 쪽을 수집함 (같으면 건너뜀). 수집 한 번에 O(ℓ) 질의가 듦.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from robustsketch.attacks.analyst import AttackConfig, AttackResult
from robustsketch.attacks.oracle import Oracle, QueryProgram, drive
from robustsketch.attacks.sign_attack import SignAttack
from robustsketch.models.decision import Decision
from robustsketch.models.sparse_vector import SparseVector


def choose_arm(plus_hits: int, minus_hits: int) -> Decision:
    """보고 횟수가 많은 쪽을 수집"""
    if plus_hits > minus_hits:
        return Decision.COLLECT_PLUS
    if minus_hits > plus_hits:
        return Decision.COLLECT_MINUS
    return Decision.SKIP


@dataclass
class RobustAttack(SignAttack):
    """반복 질의로 보고 확률을 추정하는 공격자"""

    @property
    def round_cost(self) -> int:  # type: ignore[override]
        return 2 * self.cfg.repeat_count

    def count_reports(self, v: SparseVector) -> QueryProgram[int]:
        hits = 0
        for _ in range(self.cfg.repeat_count):
            hits += self.cfg.target_key in (yield from self.ask(v))
        return hits

    def play_round(self, weight: float) -> QueryProgram[tuple[Decision, Optional[SparseVector]]]:
        tail = self.fresh_tail()
        base = self.base_vector(weight)
        plus_hits = yield from self.count_reports(base + tail)
        minus_hits = yield from self.count_reports(base - tail)
        return choose_arm(plus_hits, minus_hits), tail


def attack_robust(oracle: Oracle, cfg: AttackConfig) -> AttackResult:
    analyst = RobustAttack(cfg)
    drive(analyst.program(), oracle)
    return analyst.result()
