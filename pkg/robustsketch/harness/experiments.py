"""실험 실행기

실험마다 시행(trial) 하나를 처리하는 함수와, 시행 결과를 모아 CSV 표/요약/판정을 만드는 함수가 있음.
시행 i의 시드는 master_seed + i 이고, workers > 1이면 프로세스 풀에서 병렬로 돌리되
결과는 항상 시행 순서대로 모음.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.stats import chi2_contingency

from robustsketch.attacks.analyst import Analyst, AttackConfig, AttackResult
from robustsketch.attacks.bnr import BiasTracker
from robustsketch.attacks.median_attack import MedianAttack
from robustsketch.attacks.robust_attack import RobustAttack
from robustsketch.attacks.sign_attack import SignAttack
from robustsketch.controller.controller import Controller
from robustsketch.dp.laplace import LaplaceNoise
from robustsketch.environment.environment import EstimatorEnvironment, make_environment
from robustsketch.errors import CalibrationError
from robustsketch.estimators.oracles import oracle_p
from robustsketch.harness.config import ExperimentConfig, ExperimentName, default_config
from robustsketch.harness.csv_output import CsvTable
from robustsketch.hashing.polynomial import derive_seed
from robustsketch.models.kinds import EstimatorKind
from robustsketch.models.sign import Sign
from robustsketch.models.sparse_vector import SparseVector
from robustsketch.models.variant import CounterKind, SketchVariant
from robustsketch.robust.accounting import lambda_number
from robustsketch.robust.threshold import robust_init
from robustsketch.robust.weight import (
    WeightEstimatorParams,
    weight_estimate_fast,
    weight_estimate_naive,
)
from robustsketch.sketch.randomness import init_sketch
from robustsketch.sketch.state import sketch_vector

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

# 시행 시드에서 하위 시드를 유도할 때의 역할 번호
ANALYST_ROLE = 11
FRESH_ROLE = 12
INSTANCE_ROLE = 13
NAIVE_ROLE = 14
FAST_ROLE = 15

# 판정 기준
BNR_SUCCESS_RATE = 0.8
SLOPE_RANGE = (0.35, 0.65)
CONTROL_BAND = 0.3
CONTROL_RATE = 0.95
ROUNDS_PER_ELL_RANGE = (2.5, 10.0)
ATTACK_SUCCESS_RATE = 0.8
FRESH_REPORT_RATE = 0.95
BASIC_FAILURE_RATE = 0.8
ROBUST_CORRECT_RATE = 0.9
STDERR_SIGMAS = 3.0
CHI2_MIN_P = 1e-3
# 카이제곱 검정에서 열 합이 이보다 작은 구간은 이웃과 합침
CHI2_MIN_COLUMN = 10

ANALYSTS: dict[EstimatorKind, type[Analyst]] = {
    EstimatorKind.MEDIAN: MedianAttack,
    EstimatorKind.BASIC_SIGN: SignAttack,
    EstimatorKind.ROBUST: RobustAttack,
}

DESCRIPTIONS = {
    ExperimentName.BNR_VS_ROUNDS: "라운드에 따른 목표/경쟁/대조 키의 BNR 곡선",
    ExperimentName.ROUNDS_VS_ELL: "목표 BNR까지 필요한 라운드 수와 ℓ = d/b 의 관계",
    ExperimentName.ATTACK_END_TO_END: "최종 공격 벡터의 실패율과 새 랜덤성 스케치의 보고율",
    ExperimentName.ROBUST_SURVIVAL: "같은 공격에 대한 기본 부호 정렬 추정기와 강건 추정기 비교",
    ExperimentName.LEMMA1_VALIDATION: "heavy / 지배된 키의 정렬 확률 Monte Carlo 검증",
    ExperimentName.WEIGHT_EST_EQUIVALENCE: "빠른 가중치 추정과 naive 가중치 추정의 분포 비교",
}


@dataclass(frozen=True)
class Summary:
    """시행별 값 하나의 min/mean/max (NaN 제외)"""

    name: str
    values: tuple[float, ...]

    def _finite(self) -> np.ndarray:
        values = np.asarray(self.values, dtype=np.float64)
        return values[np.isfinite(values)]

    @property
    def min(self) -> float:
        finite = self._finite()
        return float(finite.min()) if finite.size else math.nan

    @property
    def mean(self) -> float:
        finite = self._finite()
        return float(finite.mean()) if finite.size else math.nan

    @property
    def max(self) -> float:
        finite = self._finite()
        return float(finite.max()) if finite.size else math.nan

    def line(self) -> str:
        return f"{self.name}: min={self.min:.4g} mean={self.mean:.4g} max={self.max:.4g}"


@dataclass
class ExperimentOutcome:
    """
    Attributes:
        table (CsvTable): 결과 표
        summaries (list[Summary]): 요약 값
        criteria (dict[str, bool]): 판정 기준별 통과 여부 (시행이 없으면 비어 있음)
    """

    table: CsvTable
    summaries: list[Summary] = field(default_factory=list)
    criteria: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.criteria.values())


def map_trials(fn: Callable[[Any], Any], items: Sequence[Any], workers: int) -> list[Any]:
    """items를 순서대로 처리. workers > 1이면 프로세스 풀 사용"""
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _rate(flags: Iterable[bool]) -> float:
    flags = list(flags)
    return sum(flags) / len(flags) if flags else math.nan


def header_meta(cfg: ExperimentConfig) -> dict[str, Any]:
    sk, est, rb = cfg.sketch, cfg.estimator, cfg.robust
    constants = est.constants()
    return {
        "experiment": cfg.experiment.value,
        "trials": cfg.trials,
        "master_seed": cfg.master_seed,
        "n": sk.n,
        "d": sk.d,
        "b": sk.b,
        "ell": sk.ell,
        "estimator": est.kind.value,
        "k_prime": est.k_prime,
        "m": cfg.attack.tail_size,
        "constants": "standard" if constants.is_standard else "relaxed",
        "tau_a": est.tau_a,
        "tau_b": est.tau_b,
        "privacy": "desk_scale" if rb.desk_scale else "default",
        "epsilon": rb.epsilon if rb.epsilon is not None else "default",
        "delta": rb.delta if rb.delta is not None else "default",
        "L": rb.access_limit,
    }


def new_table(cfg: ExperimentConfig, columns: tuple[str, ...]) -> CsvTable:
    return CsvTable(cfg.experiment.value, SCHEMA_VERSION, columns, header_meta(cfg))


def attack_config(cfg: ExperimentConfig, kind: EstimatorKind, seed: int,
                  d: Optional[int] = None) -> AttackConfig:
    """실험 설정과 시행 시드로 공격 설정 생성"""
    at, sk = cfg.attack, cfg.sketch
    d = sk.d if d is None else d
    return AttackConfig(
        target_key=0,
        bnr=at.bnr,
        rounds=at.rounds,
        tail_size=at.tail_size,
        k_prime=cfg.estimator.k_prime,
        b=sk.b,
        ell=d / sk.b,
        borderline_weight=at.borderline_weight,
        estimator_kind=kind,
        tail_kind=at.tail_kind,
        final_mode=at.final_mode,
        companions_role=at.companions_role,
        mask_fraction=at.mask_fraction,
        repeats=at.repeats,
        max_queries=at.max_queries,
        calibrate=at.calibrate,
        seed=derive_seed(seed, ANALYST_ROLE),
    )


def environment_for(cfg: ExperimentConfig, kind: EstimatorKind, seed: int, attack: AttackConfig,
                    d: Optional[int] = None, track_lambda: bool = False) -> EstimatorEnvironment:
    """공격의 특수 키와 대조 키를 항상 평가하는 환경"""
    rb = cfg.robust
    return make_environment(
        kind,
        cfg.sketch.params(d),
        seed,
        variant=cfg.sketch.variant,
        constants=cfg.estimator.constants(),
        k_prime=cfg.estimator.k_prime,
        watch_keys=(*attack.special_keys, attack.control_key),
        access_limit=rb.access_limit,
        max_queries=rb.max_queries,
        epsilon=rb.epsilon,
        delta=rb.delta,
        c1=rb.c1,
        c2=rb.c2,
        track_lambda=track_lambda,
    )


def bnr_reached(target: float) -> Callable[[Controller], bool]:
    """평가 쪽 종료 조건: 목표 키의 BNR이 target 이상"""
    return lambda controller: controller.current_bnr() >= target


def play(env: EstimatorEnvironment, analyst: Analyst, max_rounds: int,
         stop_when: Optional[Callable[[Controller], bool]] = None) -> Controller:
    """편향을 추적하면서 게임을 끝까지 진행"""
    controller = Controller(env, analyst, max_rounds, BiasTracker(env.ground_truth()), stop_when)
    controller.game_loop()
    return controller


# ---------------------------------------------------------------- bnr_vs_rounds

BNR_COLUMNS = ("trial", "seed", "round", "collections", "norm_sq", "queries_used",
               "bnr_target", "bnr_competitor", "bnr_control")


def bnr_trial(cfg: ExperimentConfig, trial: int) -> list[dict[str, Any]]:
    seed = cfg.trial_seed(trial)
    kind = cfg.estimator.kind
    attack = attack_config(cfg, kind, seed)
    env = environment_for(cfg, kind, seed, attack)
    controller = play(env, ANALYSTS[kind](attack), cfg.sweep.max_rounds)
    rows, collections = [], 0
    for row in controller.round_rows:
        collections += row.collected != 0
        rows.append({
            "trial": trial, "seed": seed, "round": row.round + 1, "collections": collections,
            "norm_sq": row.norm_sq, "queries_used": row.queries_used,
            "bnr_target": row.bnr_target, "bnr_competitor": row.bnr_competitor,
            "bnr_control": row.bnr_control,
        })
    logger.info("bnr_vs_rounds trial %d: %d rounds, final bnr %.3f", trial, len(rows),
                rows[-1]["bnr_target"] if rows else math.nan)
    return rows


def loglog_slope(collections: np.ndarray, bnr: np.ndarray, min_collections: float) -> float:
    """수집 횟수별 평균 BNR의 로그-로그 기울기"""
    keep = (collections >= min_collections) & np.isfinite(bnr)
    if not keep.any():
        return math.nan
    xs, ys = collections[keep], bnr[keep]
    levels = np.unique(xs)
    means = np.array([ys[xs == level].mean() for level in levels])
    positive = means > 0
    if positive.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(levels[positive]), np.log(means[positive]), 1)[0])


def run_bnr_vs_rounds(cfg: ExperimentConfig) -> ExperimentOutcome:
    table = new_table(cfg, BNR_COLUMNS)
    per_trial = map_trials(partial(bnr_trial, cfg), list(range(cfg.trials)), cfg.workers)
    for rows in per_trial:
        table.extend(rows)
    outcome = ExperimentOutcome(table)
    finished = [rows for rows in per_trial if rows]
    if not finished:
        return outcome

    final_bnr = [rows[-1]["bnr_target"] for rows in finished]
    collections = np.array(table.column("collections"), dtype=np.float64)
    bnr = np.array(table.column("bnr_target"), dtype=np.float64)
    control = np.array(table.column("bnr_control"), dtype=np.float64)
    slope = loglog_slope(collections, bnr, max(10.0, cfg.sketch.ell / 10))
    control_rate = _rate(np.abs(control[np.isfinite(control)]) <= CONTROL_BAND)

    outcome.summaries = [
        Summary("final_bnr", tuple(final_bnr)),
        Summary("collections", tuple(float(rows[-1]["collections"]) for rows in finished)),
        Summary("queries_used", tuple(float(rows[-1]["queries_used"]) for rows in finished)),
        Summary("final_bnr_control", tuple(rows[-1]["bnr_control"] for rows in finished)),
        Summary("loglog_slope", (slope,)),
    ]
    outcome.criteria = {
        "final_bnr_reached": _rate(b >= cfg.attack.bnr for b in final_bnr) >= BNR_SUCCESS_RATE,
        "sqrt_growth": SLOPE_RANGE[0] <= slope <= SLOPE_RANGE[1],
        "control_flat": control_rate >= CONTROL_RATE,
    }
    return outcome


# ---------------------------------------------------------------- rounds_vs_ell

ROUNDS_COLUMNS = ("ell", "trial", "seed", "reached", "rounds", "collections", "queries_used",
                  "final_bnr", "rounds_per_ell")


def rounds_trial(cfg: ExperimentConfig, item: tuple[int, int]) -> dict[str, Any]:
    ell, trial = item
    seed = cfg.trial_seed(trial)
    kind = cfg.estimator.kind
    d = ell * cfg.sketch.b
    attack = attack_config(cfg, kind, seed, d)
    env = environment_for(cfg, kind, seed, attack, d)
    analyst = ANALYSTS[kind](attack)
    controller = play(env, analyst, cfg.sweep.max_rounds, bnr_reached(cfg.attack.bnr))
    reached = analyst.finishing
    rounds = len(analyst.rounds)
    logger.info("rounds_vs_ell ell=%d trial %d: reached=%s after %d rounds", ell, trial,
                reached, rounds)
    return {
        "ell": ell, "trial": trial, "seed": seed, "reached": reached, "rounds": rounds,
        "collections": analyst.collections, "queries_used": analyst.queries_used,
        "final_bnr": controller.current_bnr(),
        "rounds_per_ell": rounds / ell if reached else math.nan,
    }


def run_rounds_vs_ell(cfg: ExperimentConfig) -> ExperimentOutcome:
    table = new_table(cfg, ROUNDS_COLUMNS)
    items = [(ell, trial) for ell in cfg.sweep.ell_values for trial in range(cfg.trials)]
    table.extend(map_trials(partial(rounds_trial, cfg), items, cfg.workers))
    outcome = ExperimentOutcome(table)
    if not table.rows:
        return outcome

    low, high = ROUNDS_PER_ELL_RANGE
    for ell in cfg.sweep.ell_values:
        rows = [row for row in table.rows if row["ell"] == ell]
        ratios = tuple(row["rounds_per_ell"] for row in rows)
        summary = Summary(f"rounds_per_ell[ell={ell}]", ratios)
        outcome.summaries.append(summary)
        outcome.summaries.append(
            Summary(f"reached[ell={ell}]", tuple(float(row["reached"]) for row in rows)))
        outcome.criteria[f"ell={ell}"] = low <= summary.mean <= high
    return outcome


# ---------------------------------------------------------------- attack_end_to_end

END_TO_END_COLUMNS = ("trial", "seed", "reached", "rounds", "queries_used", "measured_bnr",
                      "borderline_weight", "final_mode", "attack_success", "final_correct",
                      "fresh_reported")


def end_to_end_trial(cfg: ExperimentConfig, trial: int) -> dict[str, Any]:
    seed = cfg.trial_seed(trial)
    kind = cfg.estimator.kind
    attack = attack_config(cfg, kind, seed)
    env = environment_for(cfg, kind, seed, attack)
    analyst = ANALYSTS[kind](attack)
    controller = play(env, analyst, cfg.sweep.max_rounds, bnr_reached(cfg.attack.bnr))
    result: AttackResult = controller.result()

    fresh_reported = None
    if result.final_vector is not None:
        fresh = environment_for(cfg, kind, derive_seed(seed, FRESH_ROLE), attack)
        fresh_reported = attack.target_key in fresh.answer(result.final_vector)
    logger.info("attack_end_to_end trial %d: bnr %.3f success=%s fresh=%s", trial,
                result.measured_bnr, result.success, fresh_reported)
    return {
        "trial": trial, "seed": seed, "reached": analyst.finishing, "rounds": len(analyst.rounds),
        "queries_used": result.queries_used, "measured_bnr": result.measured_bnr,
        "borderline_weight": result.borderline_weight,
        "final_mode": attack.resolved_final_mode.value,
        "attack_success": result.success if result.final_vector is not None else None,
        "final_correct": controller.final_correct if result.final_vector is not None else None,
        "fresh_reported": fresh_reported,
    }


def run_attack_end_to_end(cfg: ExperimentConfig) -> ExperimentOutcome:
    table = new_table(cfg, END_TO_END_COLUMNS)
    table.extend(map_trials(partial(end_to_end_trial, cfg), list(range(cfg.trials)), cfg.workers))
    outcome = ExperimentOutcome(table)
    if not table.rows:
        return outcome

    qualified = [row for row in table.rows
                 if row["final_correct"] is not None and row["measured_bnr"] >= cfg.attack.bnr]
    outcome.summaries = [
        Summary("measured_bnr", tuple(table.column("measured_bnr"))),
        Summary("rounds", tuple(float(r) for r in table.column("rounds"))),
        Summary("attack_success", tuple(float(row["attack_success"]) for row in qualified)),
        Summary("fresh_reported", tuple(float(row["fresh_reported"]) for row in qualified)),
    ]
    outcome.criteria = {
        "qualified_trials": len(qualified) > 0,
        "attack_success": _rate(row["attack_success"] for row in qualified) >= ATTACK_SUCCESS_RATE,
        "fresh_reports_h": _rate(row["fresh_reported"] for row in qualified) >= FRESH_REPORT_RATE,
    }
    return outcome


# ---------------------------------------------------------------- robust_survival

SURVIVAL_COLUMNS = ("trial", "seed", "estimator", "aborted", "finished", "collections",
                    "queries_used", "measured_bnr", "attack_success", "final_correct",
                    "correct_fraction", "lambda_q", "lambda_over_L", "target_inactive")


def survival_row(cfg: ExperimentConfig, kind: EstimatorKind, trial: int) -> dict[str, Any]:
    """같은 공격자(같은 시드의 부호 정렬 공격)를 kind 환경에 대해 실행"""
    seed = cfg.trial_seed(trial)
    attack = attack_config(cfg, kind, seed)
    env = environment_for(cfg, kind, seed, attack, track_lambda=kind is EstimatorKind.ROBUST)
    analyst = SignAttack(attack)
    controller = Controller(env, analyst, cfg.sweep.max_rounds, BiasTracker(env.ground_truth()))
    aborted = False
    try:
        controller.game_loop()
    except CalibrationError as exc:
        # 보정 실패: 공격자가 최종 벡터까지 가지 못함
        logger.info("robust_survival trial %d (%s): %s", trial, kind.value, exc)
        aborted = True
    result = controller.result()
    finished = result.final_vector is not None

    lambda_q = target_inactive = math.nan
    rs = env.robust_state
    if rs is not None:
        if rs.accounting is not None:
            lambda_q = lambda_number(rs.accounting, rs.constants)
        buckets, _ = env.ground_truth().key_participation(attack.target_key)
        if buckets.size:
            target_inactive = float(np.mean(~rs.monitor.active[buckets]))
    return {
        "trial": trial, "seed": seed, "estimator": kind.value, "aborted": aborted,
        "finished": finished, "collections": analyst.collections,
        "queries_used": analyst.queries_used, "measured_bnr": result.measured_bnr,
        "attack_success": result.success,
        # 최종 질의가 없었으면 틀린 응답도 없었음
        "final_correct": controller.final_correct if finished else True,
        "correct_fraction": controller.correct_fraction,
        "lambda_q": lambda_q,
        "lambda_over_L": lambda_q / cfg.robust.access_limit,
        "target_inactive": target_inactive,
    }


def lambda_budget(cfg: ExperimentConfig) -> float:
    """λ_Q ≤ c1·L 조건의 c1. 설정이 없으면 τ_Δ/4"""
    if cfg.robust.lambda_budget is not None:
        return cfg.robust.lambda_budget
    return cfg.estimator.constants().tau_delta_threshold / 4


def survival_trial(cfg: ExperimentConfig, trial: int) -> list[dict[str, Any]]:
    return [survival_row(cfg, kind, trial)
            for kind in (EstimatorKind.BASIC_SIGN, EstimatorKind.ROBUST)]


def run_robust_survival(cfg: ExperimentConfig) -> ExperimentOutcome:
    table = new_table(cfg, SURVIVAL_COLUMNS)
    for rows in map_trials(partial(survival_trial, cfg), list(range(cfg.trials)), cfg.workers):
        table.extend(rows)
    outcome = ExperimentOutcome(table)
    if not table.rows:
        return outcome

    basic = [row for row in table.rows if row["estimator"] == EstimatorKind.BASIC_SIGN.value]
    robust = [row for row in table.rows if row["estimator"] == EstimatorKind.ROBUST.value]
    outcome.summaries = [
        Summary("basic_measured_bnr", tuple(row["measured_bnr"] for row in basic)),
        Summary("basic_final_correct", tuple(float(row["final_correct"]) for row in basic)),
        Summary("robust_final_correct", tuple(float(row["final_correct"]) for row in robust)),
        Summary("robust_lambda_over_L", tuple(row["lambda_over_L"] for row in robust)),
        Summary("robust_target_inactive", tuple(row["target_inactive"] for row in robust)),
    ]
    budget = lambda_budget(cfg)
    outcome.criteria = {
        "basic_defeated": _rate(not row["final_correct"] for row in basic) >= BASIC_FAILURE_RATE,
        "robust_survives": _rate(row["final_correct"] for row in robust) >= ROBUST_CORRECT_RATE,
        # 강건 추정기의 보장은 λ_Q ≤ c1·L 인 질의 열에서만 성립
        "lambda_within_budget": all(row["lambda_over_L"] <= budget for row in robust),
    }
    return outcome


# ---------------------------------------------------------------- lemma1_validation

LEMMA_COLUMNS = ("trial", "seed", "case", "b", "support", "key_value", "p", "stderr", "bound",
                 "passed")


def heavy_case(b: int, c_b: float, support: int, seed: int) -> SparseVector:
    """±1 꼬리 위에 heavy 조건을 막 넘는 키 0"""
    rng = np.random.default_rng(seed)
    tail = SparseVector(np.arange(1, support + 1, dtype=np.int64),
                        rng.choice(np.array([-1, 1], dtype=np.int64), size=support))
    value = math.floor(c_b / math.sqrt(b) * tail.norm()) + 1
    return SparseVector.unit(0, value) + tail


def dominated_case(b: int, c_a: float) -> SparseVector:
    """값 1인 키 0과 값 2인 키 C_a·b개"""
    count = int(math.ceil(c_a * b))
    others = SparseVector(np.arange(1, count + 1, dtype=np.int64), np.full(count, 2, dtype=np.int64))
    return SparseVector.unit(0, 1) + others


def lemma_trial(cfg: ExperimentConfig, trial: int) -> list[dict[str, Any]]:
    seed = cfg.trial_seed(trial)
    b = cfg.sketch.b
    constants = cfg.estimator.constants()
    samples = cfg.sweep.samples
    support = int(math.ceil(constants.C_a * b))

    heavy = heavy_case(b, constants.C_b, support, derive_seed(seed, INSTANCE_ROLE))
    p_heavy = oracle_p(heavy, 0, Sign.PLUS, samples, derive_seed(seed, INSTANCE_ROLE, 0), b)
    dominated = dominated_case(b, constants.C_a)
    p_dom = oracle_p(dominated, 0, Sign.PLUS, samples, derive_seed(seed, INSTANCE_ROLE, 1), b)

    heavy_bound = constants.tau_b - STDERR_SIGMAS * p_heavy.stderr
    dominated_bound = constants.tau_a + STDERR_SIGMAS * p_dom.stderr
    logger.info("lemma1 trial %d: heavy p=%.5f, dominated p=%.5f", trial, p_heavy.value,
                p_dom.value)
    return [
        {"trial": trial, "seed": seed, "case": "heavy", "b": b, "support": support,
         "key_value": heavy.get(0), "p": p_heavy.value, "stderr": p_heavy.stderr,
         "bound": heavy_bound, "passed": p_heavy.value >= heavy_bound},
        {"trial": trial, "seed": seed, "case": "dominated", "b": b, "support": support,
         "key_value": 1, "p": p_dom.value, "stderr": p_dom.stderr,
         "bound": dominated_bound, "passed": p_dom.value <= dominated_bound},
    ]


def run_lemma1_validation(cfg: ExperimentConfig) -> ExperimentOutcome:
    table = new_table(cfg, LEMMA_COLUMNS)
    for rows in map_trials(partial(lemma_trial, cfg), list(range(cfg.trials)), cfg.workers):
        table.extend(rows)
    outcome = ExperimentOutcome(table)
    if not table.rows:
        return outcome

    for case in ("heavy", "dominated"):
        rows = [row for row in table.rows if row["case"] == case]
        outcome.summaries.append(Summary(f"{case}_p", tuple(row["p"] for row in rows)))
        outcome.criteria[case] = all(row["passed"] for row in rows)
    return outcome


# ---------------------------------------------------------------- weight_est_equivalence

WEIGHT_COLUMNS = ("trial", "seed", "w", "naive_count", "fast_count")


def weight_instance(n: int, bound: int, seed: int) -> SparseVector:
    """키 0이 W/2이고 나머지가 [-W/4, W/4]의 정수인 벡터"""
    rng = np.random.default_rng(seed)
    values = rng.integers(-(bound // 4), bound // 4 + 1, size=n, dtype=np.int64)
    values[0] = bound // 2
    return SparseVector(np.arange(n, dtype=np.int64), values)


def merge_sparse_bins(table: np.ndarray, min_column: int = CHI2_MIN_COLUMN) -> np.ndarray:
    """열 합이 min_column 미만인 인접 열을 합친 2×K 표"""
    merged, current = [], np.zeros(table.shape[0], dtype=np.int64)
    for column in table.T:
        current = current + column
        if current.sum() >= min_column:
            merged.append(current)
            current = np.zeros(table.shape[0], dtype=np.int64)
    if current.sum() > 0:
        if merged:
            merged[-1] = merged[-1] + current
        else:
            merged.append(current)
    return np.array(merged, dtype=np.int64).T


def equivalence_p_value(naive: np.ndarray, fast: np.ndarray) -> float:
    merged = merge_sparse_bins(np.vstack([naive, fast]))
    if merged.shape[1] < 2:
        return 1.0
    return float(chi2_contingency(merged).pvalue)


def weight_trial(cfg: ExperimentConfig, trial: int) -> tuple[list[dict[str, Any]], float]:
    """같은 스케치에 대해 새 모니터로 naive/fast 추정을 samples번씩 반복"""
    seed = cfg.trial_seed(trial)
    sk, rb = cfg.sketch, cfg.robust
    params = WeightEstimatorParams(rb.weight_bound, rb.tau_down, rb.tau_up)
    rand = init_sketch(sk.variant or SketchVariant.BCOUNT_SKETCH, sk.params(), seed)
    v = weight_instance(sk.n, rb.weight_bound, derive_seed(seed, INSTANCE_ROLE))
    state = sketch_vector(rand, v, CounterKind.INT64)
    constants = cfg.estimator.constants()

    def fresh_state(role: int, run: int):
        return robust_init(rand, constants, rb.access_limit, rb.max_queries,
                           noise=LaplaceNoise(derive_seed(seed, role, run)), c1=rb.c1, c2=rb.c2,
                           epsilon=rb.epsilon, delta=rb.delta, weights=True)

    size = 2 * params.W + 1
    naive = np.zeros(size, dtype=np.int64)
    fast = np.zeros(size, dtype=np.int64)
    for run in range(cfg.sweep.samples):
        naive[weight_estimate_naive(fresh_state(NAIVE_ROLE, run), state, 0, params) + params.W] += 1
        fast[weight_estimate_fast(fresh_state(FAST_ROLE, run), state, 0, params) + params.W] += 1
    p_value = equivalence_p_value(naive, fast)
    logger.info("weight_est trial %d: chi2 p=%.4g", trial, p_value)
    rows = [{"trial": trial, "seed": seed, "w": w - params.W, "naive_count": int(naive[w]),
             "fast_count": int(fast[w])}
            for w in range(size) if naive[w] or fast[w]]
    return rows, p_value


def run_weight_est_equivalence(cfg: ExperimentConfig) -> ExperimentOutcome:
    table = new_table(cfg, WEIGHT_COLUMNS)
    p_values = []
    for rows, p_value in map_trials(partial(weight_trial, cfg), list(range(cfg.trials)),
                                    cfg.workers):
        table.extend(rows)
        p_values.append(p_value)
    outcome = ExperimentOutcome(table)
    if not p_values:
        return outcome
    outcome.summaries = [Summary("chi2_p", tuple(p_values))]
    outcome.criteria = {"same_distribution": all(p > CHI2_MIN_P for p in p_values)}
    return outcome


# ---------------------------------------------------------------- registry

RUNNERS: dict[ExperimentName, Callable[[ExperimentConfig], ExperimentOutcome]] = {
    ExperimentName.BNR_VS_ROUNDS: run_bnr_vs_rounds,
    ExperimentName.ROUNDS_VS_ELL: run_rounds_vs_ell,
    ExperimentName.ATTACK_END_TO_END: run_attack_end_to_end,
    ExperimentName.ROBUST_SURVIVAL: run_robust_survival,
    ExperimentName.LEMMA1_VALIDATION: run_lemma1_validation,
    ExperimentName.WEIGHT_EST_EQUIVALENCE: run_weight_est_equivalence,
}


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ExperimentOutcome:
    """설정된 실험을 실행하고 (write면) CSV를 cfg.output에 씀"""
    logger.info("running %s: %d trials from seed %d", cfg.experiment.value, cfg.trials,
                cfg.master_seed)
    outcome = RUNNERS[cfg.experiment](cfg)
    if write:
        path = outcome.table.write(cfg.output)
        logger.info("wrote %d rows to %s", len(outcome.table.rows), path)
    return outcome


# ---------------------------------------------------------------- demo

def demo_config(kind: EstimatorKind, ell: int, seed: int) -> ExperimentConfig:
    """attack demo용 설정: median은 종단 공격, 부호 정렬/강건은 생존 실험 설정을 ℓ에 맞춤"""
    if kind is EstimatorKind.MEDIAN:
        base = default_config(ExperimentName.ATTACK_END_TO_END)
        return replace(base, trials=1, master_seed=seed,
                       sketch=replace(base.sketch, d=ell * base.sketch.b))
    base = default_config(ExperimentName.ROBUST_SURVIVAL)
    return replace(
        base, trials=1, master_seed=seed,
        estimator=replace(base.estimator, kind=kind),
        sketch=replace(base.sketch, d=ell * base.sketch.b),
        attack=replace(base.attack, rounds=20 * ell, max_queries=base.robust.max_queries),
        robust=replace(base.robust, access_limit=ell),
    )


def demo_attack(kind: EstimatorKind, ell: int, seed: int) -> tuple[AttackResult, Controller]:
    """ℓ과 시드 하나로 kind 추정기에 대한 공격을 한 번 실행"""
    cfg = demo_config(kind, ell, seed)
    attack = attack_config(cfg, kind, seed)
    env = environment_for(cfg, kind, seed, attack, track_lambda=kind is EstimatorKind.ROBUST)
    stop_when = bnr_reached(cfg.attack.bnr) if kind is EstimatorKind.MEDIAN else None
    analyst = ANALYSTS[kind](attack)
    controller = Controller(env, analyst, cfg.sweep.max_rounds, BiasTracker(env.ground_truth()),
                            stop_when)
    try:
        controller.game_loop()
    except CalibrationError as exc:
        logger.warning("attack demo aborted: %s", exc)
    return controller.result(), controller
