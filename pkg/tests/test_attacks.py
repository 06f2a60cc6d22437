# pylint: disable=missing-class-docstring, missing-function-docstring
"""tests for the attacks package (oracle boundary, analysts, final vector, calibration, bnr)"""

import numpy as np
import pytest

from robustsketch.attacks.analyst import AttackConfig, NullAnalyst
from robustsketch.attacks.bnr import BiasTracker, measure_bnr
from robustsketch.attacks.calibration import calibrate_borderline
from robustsketch.attacks.final_vector import build_final_vector, mask_weight_from_report
from robustsketch.attacks.median_attack import MedianAttack, attack_median
from robustsketch.attacks.oracle import check_report, drive, oracle_interface
from robustsketch.attacks.robust_attack import RobustAttack, attack_robust, choose_arm
from robustsketch.attacks.sign_attack import attack_basic_sign
from robustsketch.errors import CalibrationError, ProtocolError
from robustsketch.models.decision import Decision
from robustsketch.models.kinds import EstimatorKind, FinalMode
from robustsketch.models.params import SketchParams
from robustsketch.models.report import Report
from robustsketch.models.sparse_vector import SparseVector
from robustsketch.models.variant import SketchVariant
from robustsketch.sketch.randomness import init_sketch

H = 0


def hidden_score(v: SparseVector) -> float:
    """공격자가 모르는 편향 방향: 10 이상인 3의 배수 키 값의 합"""
    mask = (v.keys % 3 == 0) & (v.keys >= 10)
    return float(v.values[mask].sum())


def sign_oracle(v: SparseVector) -> Report:
    return Report(frozenset({H}) if hidden_score(v) > 0 else frozenset())


def sign_config(**kwargs) -> AttackConfig:
    defaults = dict(target_key=H, rounds=20, tail_size=50, b=10, ell=5,
                    estimator_kind=EstimatorKind.BASIC_SIGN, calibrate=False, seed=1)
    defaults.update(kwargs)
    return AttackConfig(**defaults)


def test_check_report_rejects_malformed_answers():
    assert check_report(Report(frozenset({1, 2}))).keys == {1, 2}

    with pytest.raises(ProtocolError):
        check_report({1, 2})
    with pytest.raises(ProtocolError):
        check_report(Report(frozenset({-1})))
    with pytest.raises(ProtocolError):
        check_report(Report(frozenset({1, 2, 3})), max_size=2)
    with pytest.raises(ProtocolError):
        check_report(Report(frozenset({1}), {2: 1.0}))


def test_drive_runs_program_to_completion():
    def program():
        first = yield SparseVector.unit(1, 1)
        second = yield SparseVector.unit(2, 1)
        return len(first) + len(second)

    assert drive(program(), lambda v: Report(frozenset(v.keys.tolist()))) == 2
    assert oracle_interface(lambda v: Report(frozenset({7})), SparseVector.zeros()) == {7}


def test_attack_config_key_layout():
    median = AttackConfig(target_key=5, k_prime=3)
    assert median.special_keys == (5, 6, 7, 8)
    assert median.competitor_key == 6
    assert median.control_key == 9 and median.arena_start == 10
    assert median.resolved_final_mode is FinalMode.MASK_HEAVY

    sign = sign_config(target_key=5)
    assert sign.special_keys == (5,)
    assert sign.competitor_key is None and sign.control_key == 6
    assert sign.resolved_final_mode is FinalMode.FAKE_HEAVY
    assert sign.repeat_count == 5

    with pytest.raises(ValueError):
        AttackConfig(companions_role="other")
    with pytest.raises(ValueError):
        AttackConfig(tail_size=0)


def test_sign_attack_collects_biased_tails():
    cfg = sign_config()
    result = attack_basic_sign(sign_oracle, cfg)

    assert result.collections == cfg.rounds
    # 꼬리 키는 서로 겹치지 않으므로 ‖a‖² = r·m
    assert result.a.norm_sq() == cfg.rounds * cfg.tail_size
    assert H not in result.a
    assert min(result.a.keys) >= cfg.arena_start
    # 수집한 꼬리는 모두 숨은 방향으로 정렬됨
    assert hidden_score(result.a) >= cfg.rounds
    assert result.final_vector == result.a and result.success
    assert result.queries_used == 2 * len(result.collected) + 1


def test_attack_is_deterministic_given_seed():
    a = attack_basic_sign(sign_oracle, sign_config(seed=4))
    b = attack_basic_sign(sign_oracle, sign_config(seed=4))
    c = attack_basic_sign(sign_oracle, sign_config(seed=5))

    assert a.a == b.a and a.collected == b.collected
    assert a.a != c.a


def test_query_budget_stops_collection():
    result = attack_basic_sign(sign_oracle, sign_config(rounds=100, max_queries=15))

    # 라운드당 2번, 최종 1번
    assert result.queries_used == 15
    assert len(result.collected) == 7


def test_protocol_violation_surfaces_from_oracle():
    with pytest.raises(ProtocolError):
        attack_basic_sign(lambda v: frozenset({H}), sign_config())


def median_oracle(cfg: AttackConfig):
    def oracle(v: SparseVector) -> Report:
        supers = set(range(H + 2, H + cfg.k_prime + 1))
        winner = H if hidden_score(v) > 0 else H + 1
        return Report(frozenset(supers | {winner}))
    return oracle


def test_median_attack_collects_by_winner():
    cfg = AttackConfig(target_key=H, k_prime=4, rounds=15, tail_size=40, b=10, ell=10, seed=2)
    analyst = MedianAttack(cfg)
    drive(analyst.program(), median_oracle(cfg))
    result = analyst.result()

    assert result.collections == 15
    # h가 이기면 z, h2가 이기면 -z: 수집한 꼬리는 숨은 방향과 어긋나지 않음
    assert all(hidden_score(r.tail) >= 0 for r in analyst.rounds)
    assert attack_median(median_oracle(cfg), cfg).a == result.a
    # 탐침 1번 + 최종 1번
    assert result.queries_used == 15 + 2
    assert result.final_vector.get(H) == int(cfg.default_weight())


def test_median_base_vector_and_companions():
    cfg = AttackConfig(target_key=H, k_prime=3, tail_size=10, b=10, companions_role="swapped")
    analyst = MedianAttack(cfg)

    base = analyst.base_vector(8)
    assert base.to_dict() == {0: 8, 1: 8, 2: 16, 3: 16}
    assert analyst.companions(8.0).to_dict() == {1: 4.0, 2: 4.0, 3: 4.0}
    assert MedianAttack(AttackConfig(k_prime=3)).companions(8.0) is None


def test_build_final_vector_modes():
    a = SparseVector.from_dict({10: 1, 11: -1})

    masked = build_final_vector(a, 0, 5.0, FinalMode.MASK_HEAVY)
    assert masked.to_dict() == {0: 5, 10: -1, 11: 1}
    assert masked.is_integral
    assert build_final_vector(a, 0, 5.0, FinalMode.FAKE_HEAVY) == a

    companions = SparseVector.from_dict({0: 9, 1: 2})
    assert build_final_vector(a, 0, 5, FinalMode.FAKE_HEAVY, companions).to_dict() == \
        {1: 2, 10: 1, 11: -1}
    with pytest.raises(ValueError):
        build_final_vector(SparseVector.unit(0, 1), 0, 1, FinalMode.MASK_HEAVY)


def test_mask_weight_from_report():
    assert mask_weight_from_report(Report(frozenset({0}), {0: -12.0}), 0, 0.5, 3.0) == 6.0
    assert mask_weight_from_report(Report(frozenset({0})), 0, 0.5, 3.0) == 3.0
    assert mask_weight_from_report(Report(frozenset({1}), {1: 2.0}), 0, 0.5, 3.0) == 3.0


def test_choose_arm():
    assert choose_arm(3, 1) is Decision.COLLECT_PLUS
    assert choose_arm(0, 2) is Decision.COLLECT_MINUS
    assert choose_arm(2, 2) is Decision.SKIP


def test_robust_attack_repeats_each_arm():
    cfg = sign_config(estimator_kind=EstimatorKind.ROBUST, repeats=3, rounds=5)
    assert RobustAttack(cfg).round_cost == 6

    result = attack_robust(sign_oracle, cfg)
    assert result.collections == 5
    assert result.queries_used == 6 * len(result.collected) + 1


def test_calibration_finds_borderline_weight():
    rng = np.random.default_rng(0)

    def noisy(v: SparseVector) -> Report:
        return Report(frozenset({H}) if v.get(H) + 2 * rng.standard_normal() > 10 else frozenset())

    # 초기값 √(m/b) = 5 에서 보고 빈도가 1/4..3/4 인 구간(약 8.7..11.3)으로 이동
    cfg = sign_config(tail_size=100, b=4, calibrate=True)
    weight = calibrate_borderline(noisy, cfg)
    assert 7.0 <= weight <= 13.0


def test_calibration_gives_up():
    cfg = sign_config(tail_size=5, b=5)

    with pytest.raises(CalibrationError):
        calibrate_borderline(lambda v: Report(), cfg)


def test_null_analyst_ignores_answers():
    cfg = AttackConfig(target_key=H, rounds=12, tail_size=20, b=10)
    analyst = NullAnalyst(cfg, heavy_keys=2, heavy_weight=50.0)
    queries = []

    def oracle(v):
        queries.append(v)
        return Report()

    drive(analyst.program(), oracle)
    assert len(queries) == 12
    assert analyst.collections == 0 and analyst.final_vector is None
    assert all(abs(q.get(0)) == 50 and abs(q.get(1)) == 50 for q in queries)


def test_bias_tracker_matches_one_shot_measurement():
    rand = init_sketch(SketchVariant.COUNT_SKETCH, SketchParams(n=1000, d=100, b=10), seed=2)
    rng = np.random.default_rng(0)
    tracker = BiasTracker(rand)
    total = SparseVector.zeros()
    for start in (10, 200, 400):
        tail = SparseVector(np.arange(start, start + 150), rng.choice([-1, 1], size=150))
        tracker.add(tail)
        total = total + tail

    assert tracker.norm_sq == total.norm_sq() == 450
    assert tracker.bnr(0) == pytest.approx(measure_bnr(rand, 0, total))
    assert measure_bnr(rand, 0, SparseVector.zeros()) == 0.0
