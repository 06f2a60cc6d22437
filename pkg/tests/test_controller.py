# pylint: disable=missing-class-docstring, missing-function-docstring
"""tests for the game controller and estimator environment"""

import math

import numpy as np
import pytest

from robustsketch.attacks.analyst import AttackConfig, NullAnalyst
from robustsketch.attacks.bnr import BiasTracker
from robustsketch.attacks.median_attack import MedianAttack
from robustsketch.controller.controller import Controller, game_loop, judge, median_heavy_parameter
from robustsketch.environment.environment import make_environment
from robustsketch.errors import SketchParameterError
from robustsketch.models.constants import EstimatorConstants
from robustsketch.models.kinds import EstimatorKind
from robustsketch.models.params import SketchParams
from robustsketch.models.report import Report
from robustsketch.models.sparse_vector import SparseVector
from robustsketch.models.variant import SketchVariant


def median_env(k_prime=6, n=1 << 15, seed=0):
    return make_environment(EstimatorKind.MEDIAN, SketchParams(n=n, d=300, b=30), seed,
                            k_prime=k_prime)


def test_environment_defaults():
    env = median_env()
    assert env.ground_truth().variant is SketchVariant.COUNT_SKETCH
    assert env.robust_state is None

    robust = make_environment(EstimatorKind.ROBUST, SketchParams(n=100, d=40, b=4), 1,
                              access_limit=5, max_queries=10, epsilon=1.0, delta=1e-6,
                              track_lambda=True)
    assert robust.ground_truth().variant is SketchVariant.BCOUNT_SKETCH
    assert robust.robust_state.accounting is not None

    with pytest.raises(SketchParameterError):
        median_env(k_prime=0)


def test_environment_candidates_for_large_domain():
    env = make_environment(EstimatorKind.BASIC_SIGN, SketchParams(n=1 << 20, d=40, b=4), 1,
                           watch_keys=[3, 7])
    v = SparseVector.from_dict({100: 1, 7: 2})

    assert env.candidates(v).tolist() == [3, 7, 100]
    assert median_env().candidates(v) is None


def test_judge_median():
    env = median_env(k_prime=2)
    v = SparseVector.from_dict({0: 10, 1: 1, 2: 1})

    # k = k'/2 = 1: ‖v_tail[1]‖² = 2 이므로 키 0만 heavy
    assert median_heavy_parameter(2) == 1
    assert judge(env, v, Report(frozenset({0, 5})))
    assert not judge(env, v, Report(frozenset({1, 2})))


def test_judge_sign_alignment():
    env = make_environment(EstimatorKind.BASIC_SIGN, SketchParams(n=100, d=900, b=900), 0,
                           constants=EstimatorConstants())
    entries = {0: 100}
    entries.update({i: 1 for i in range(1, 11)})
    v = SparseVector.from_dict(entries)

    # heavy ⊆ 보고 ⊆ heavy ∪ suspect
    assert judge(env, v, Report(frozenset({0})))
    assert judge(env, v, Report(frozenset({0, 3})))
    assert not judge(env, v, Report(frozenset({3})))
    assert not judge(env, v, Report(frozenset({0, 50})))


def test_null_analyst_sees_correct_answers():
    cfg = AttackConfig(target_key=0, rounds=40, tail_size=300, b=30, k_prime=10)
    controller = Controller(median_env(), NullAnalyst(cfg, heavy_keys=3))
    steps = controller.game_loop()

    assert len(steps) == 40
    assert controller.correct_fraction >= 0.95
    # 마지막 질의 뒤에 끝나는 라운드도 기록됨
    assert len(controller.round_rows) == 40
    assert controller.round_rows[-1].round == 39


def test_stop_condition_requests_finish():
    cfg = AttackConfig(target_key=0, rounds=100, tail_size=50, b=30)
    analyst = NullAnalyst(cfg)
    controller = Controller(median_env(), analyst, stop_when=lambda c: c.total_steps >= 5)
    controller.game_loop()

    assert analyst.finishing
    assert controller.total_steps == 5 and controller.is_game_over
    assert len(controller.round_rows) == len(analyst.rounds) == 5


def test_max_rounds_caps_game():
    cfg = AttackConfig(target_key=0, rounds=100, tail_size=50, b=30)

    assert len(game_loop(NullAnalyst(cfg), median_env(), max_rounds=7)) == 7

    analyst = NullAnalyst(cfg)
    controller = Controller(median_env(), analyst, max_rounds=7)
    controller.game_loop()
    # 7번째 응답은 분석가에게 전달되지 않으므로 라운드는 6개
    assert len(controller.round_rows) == len(analyst.rounds) == 6


def test_median_attack_rounds_are_tracked():
    env = make_environment(EstimatorKind.MEDIAN, SketchParams(n=1 << 15, d=250, b=10), 3,
                           k_prime=4)
    cfg = AttackConfig(target_key=0, k_prime=4, rounds=30, tail_size=300, b=10, ell=25, seed=3)
    analyst = MedianAttack(cfg)
    controller = Controller(env, analyst, tracker=BiasTracker(env.ground_truth()))
    controller.game_loop()

    assert len(controller.round_rows) == len(analyst.rounds)
    assert analyst.collections == 30
    assert {row.collected for row in controller.round_rows} <= {-1, 0, 1}
    last = controller.round_rows[-1]
    assert not math.isnan(last.bnr_target) and not math.isnan(last.bnr_control)
    assert last.norm_sq == 30 * 300

    result = controller.result()
    assert not math.isnan(result.measured_bnr)
    assert controller.final_correct in (True, False)
    assert np.array_equal(result.a.keys, analyst.collector.vector().keys)
