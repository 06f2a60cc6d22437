"""실험 설정 (TOML)

설정은 섹션별 dataclass로 표현하고 tomlkit으로 읽고 씀.
ell, τ 같은 파생 값은 저장하지 않고 기본 값(n, d, b, 상수)에서 다시 계산함.
잘못된 값은 점 표기 경로를 담은 ConfigError로 알림.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Any, Optional

import tomlkit
from tomlkit.exceptions import ParseError

from robustsketch.errors import ConfigError
from robustsketch.models.constants import EstimatorConstants
from robustsketch.models.kinds import EstimatorKind, FinalMode, TailKind
from robustsketch.models.params import SketchParams
from robustsketch.models.variant import SketchVariant


class ExperimentName(Enum):
    BNR_VS_ROUNDS = "bnr_vs_rounds"
    ROUNDS_VS_ELL = "rounds_vs_ell"
    ATTACK_END_TO_END = "attack_end_to_end"
    ROBUST_SURVIVAL = "robust_survival"
    LEMMA1_VALIDATION = "lemma1_validation"
    WEIGHT_EST_EQUIVALENCE = "weight_est_equivalence"


@dataclass(frozen=True)
class SketchSection:
    """
    Attributes:
        n (int): 키 정의역 크기
        d (int): 버킷 수
        b (int): 폭
        variant (SketchVariant): None이면 추정기 종류에 따른 기본값
    """

    n: int = 1 << 32
    d: int = 3000
    b: int = 30
    variant: Optional[SketchVariant] = None

    @property
    def ell(self) -> float:
        return self.d / self.b

    def params(self, d: Optional[int] = None) -> SketchParams:
        return SketchParams(self.n, self.d if d is None else d, self.b)


@dataclass(frozen=True)
class EstimatorSection:
    kind: EstimatorKind = EstimatorKind.MEDIAN
    k_prime: int = 10
    C_a: float = 50.0  # pylint: disable=invalid-name
    C_b: float = 30.0  # pylint: disable=invalid-name
    tau_a: float = 59 / 60
    tau_b: float = 399 / 400

    def constants(self) -> EstimatorConstants:
        return EstimatorConstants(self.C_a, self.C_b, self.tau_a, self.tau_b)


@dataclass(frozen=True)
class AttackSection:
    """AttackConfig의 실험 설정 쪽 값 (목표 키, 시드 등은 실행 시 정함)"""

    rounds: int = 500
    tail_size: int = 3000
    bnr: float = 1.0
    tail_kind: TailKind = TailKind.SIGN
    final_mode: Optional[FinalMode] = None
    companions_role: str = "appendix"
    mask_fraction: float = 1.0
    borderline_weight: Optional[float] = None
    repeats: Optional[int] = None
    max_queries: Optional[int] = None
    calibrate: bool = True


@dataclass(frozen=True)
class RobustSection:
    """강건 추정기와 가중치 추정 설정

    epsilon/delta를 지정하면 C1/√L, C2/(n·m·b·L) 대신 사용함 (탁상 규모 실험용).
    lambda_budget는 λ_Q ≤ c1·L 조건의 c1이며, 없으면 τ_Δ/4를 씀.
    """

    access_limit: int = 100
    max_queries: int = 10_000
    epsilon: Optional[float] = None
    delta: Optional[float] = None
    c1: float = 1.0
    c2: float = 1.0
    weight_bound: int = 40
    tau_down: float = 0.1
    tau_up: float = 0.9
    lambda_budget: Optional[float] = None

    @property
    def desk_scale(self) -> bool:
        return self.epsilon is not None or self.delta is not None


@dataclass(frozen=True)
class SweepSection:
    """
    Attributes:
        ell_values (list[int]): rounds_vs_ell에서 훑을 d/b 값
        samples (int): Monte Carlo 표본 수 / 가중치 추정 반복 수
        max_rounds (int): 목표 BNR에 도달하지 못할 때의 라운드 상한
    """

    ell_values: tuple[int, ...] = (25, 50, 100)
    samples: int = 1_000_000
    max_rounds: int = 5000


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: ExperimentName = ExperimentName.BNR_VS_ROUNDS
    trials: int = 10
    master_seed: int = 0
    output: str = "results.csv"
    workers: int = 1
    sketch: SketchSection = field(default_factory=SketchSection)
    estimator: EstimatorSection = field(default_factory=EstimatorSection)
    attack: AttackSection = field(default_factory=AttackSection)
    robust: RobustSection = field(default_factory=RobustSection)
    sweep: SweepSection = field(default_factory=SweepSection)

    def __post_init__(self):
        validate(self)

    def trial_seed(self, trial: int) -> int:
        return self.master_seed + trial

    def with_seed(self, master_seed: int) -> ExperimentConfig:
        return replace(self, master_seed=master_seed)

    def with_output(self, output: str) -> ExperimentConfig:
        return replace(self, output=output)


_SECTIONS = {
    "sketch": SketchSection,
    "estimator": EstimatorSection,
    "attack": AttackSection,
    "robust": RobustSection,
    "sweep": SweepSection,
}

_ENUMS = {
    ("experiment",): ExperimentName,
    ("sketch", "variant"): SketchVariant,
    ("estimator", "kind"): EstimatorKind,
    ("attack", "tail_kind"): TailKind,
    ("attack", "final_mode"): FinalMode,
}


def _require(condition: bool, path: str, message: str) -> None:
    if not condition:
        raise ConfigError(path, message)


def validate(cfg: ExperimentConfig) -> None:
    """값 범위 검사

    Raises:
        ConfigError: 잘못된 항목의 경로와 함께
    """
    _require(cfg.trials >= 0, "trials", "0 이상이어야 합니다.")
    _require(cfg.workers >= 1, "workers", "1 이상이어야 합니다.")
    _require(cfg.master_seed >= 0, "master_seed", "0 이상이어야 합니다.")
    _require(bool(cfg.output), "output", "출력 경로가 비어 있습니다.")

    sk = cfg.sketch
    _require(sk.n >= 1, "sketch.n", "1 이상이어야 합니다.")
    _require(sk.b >= 1, "sketch.b", "1 이상이어야 합니다.")
    _require(sk.d >= sk.b, "sketch.d", "b 이상이어야 합니다.")
    if sk.variant is SketchVariant.COUNT_SKETCH or (
            sk.variant is None and cfg.estimator.kind is EstimatorKind.MEDIAN):
        _require(sk.d % sk.b == 0, "sketch.d", "CountSketch는 d가 b의 배수여야 합니다.")

    est = cfg.estimator
    _require(est.k_prime >= 1, "estimator.k_prime", "1 이상이어야 합니다.")
    _require(0.5 < est.tau_a < est.tau_b < 1, "estimator.tau_b",
             "1/2 < tau_a < tau_b < 1 이어야 합니다.")
    _require(est.C_a > 0, "estimator.C_a", "양수여야 합니다.")
    _require(est.C_b > 0, "estimator.C_b", "양수여야 합니다.")

    at = cfg.attack
    _require(at.rounds >= 0, "attack.rounds", "0 이상이어야 합니다.")
    _require(at.tail_size >= 1, "attack.tail_size", "1 이상이어야 합니다.")
    _require(at.bnr > 0, "attack.bnr", "양수여야 합니다.")
    _require(at.companions_role in ("appendix", "swapped"), "attack.companions_role",
             "appendix 또는 swapped 여야 합니다.")
    _require(at.mask_fraction > 0, "attack.mask_fraction", "양수여야 합니다.")
    _require(at.repeats is None or at.repeats >= 1, "attack.repeats", "1 이상이어야 합니다.")
    _require(at.max_queries is None or at.max_queries >= 1, "attack.max_queries",
             "1 이상이어야 합니다.")

    rb = cfg.robust
    _require(rb.access_limit >= 1, "robust.access_limit", "1 이상이어야 합니다.")
    _require(rb.max_queries >= 1, "robust.max_queries", "1 이상이어야 합니다.")
    _require(rb.epsilon is None or rb.epsilon > 0, "robust.epsilon", "양수여야 합니다.")
    _require(rb.delta is None or 0 < rb.delta < 1, "robust.delta", "(0, 1) 범위여야 합니다.")
    _require(rb.lambda_budget is None or rb.lambda_budget > 0, "robust.lambda_budget",
             "양수여야 합니다.")
    _require(rb.weight_bound >= 1, "robust.weight_bound", "1 이상이어야 합니다.")
    _require(0 < rb.tau_down < rb.tau_up < 1, "robust.tau_up",
             "0 < tau_down < tau_up < 1 이어야 합니다.")

    sw = cfg.sweep
    valid_ells = all(isinstance(e, int) and e >= 1 for e in sw.ell_values)
    _require(len(sw.ell_values) > 0 and valid_ells, "sweep.ell_values",
             "1 이상의 정수가 하나 이상 있어야 합니다.")
    _require(sw.samples >= 1, "sweep.samples", "1 이상이어야 합니다.")
    _require(sw.max_rounds >= 1, "sweep.max_rounds", "1 이상이어야 합니다.")


def _plain(value: Any) -> Any:
    """TOML에 쓸 수 있는 값으로 변환 (None은 호출 쪽에서 생략)"""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, tuple):
        return list(value)
    return value


def to_toml(cfg: ExperimentConfig) -> str:
    """설정을 TOML 문자열로. None 값은 쓰지 않음"""
    doc = tomlkit.document()
    doc.add(tomlkit.comment("robustsketch experiment config"))
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if f.name in _SECTIONS:
            table = tomlkit.table()
            for sf in fields(value):
                item = getattr(value, sf.name)
                if item is not None:
                    table.add(sf.name, _plain(item))
            doc.add(f.name, table)
        elif value is not None:
            doc.add(f.name, _plain(value))
    return tomlkit.dumps(doc)


def _convert(path: tuple[str, ...], raw: Any, default: Any) -> Any:
    dotted = ".".join(path)
    enum_type = _ENUMS.get(path)
    if enum_type is not None:
        try:
            return enum_type(raw)
        except ValueError as exc:
            choices = ", ".join(e.value for e in enum_type)
            raise ConfigError(dotted, f"'{raw}'는 허용되지 않습니다 ({choices}).") from exc
    if isinstance(default, tuple):
        if not isinstance(raw, list):
            raise ConfigError(dotted, "배열이어야 합니다.")
        return tuple(raw)
    if isinstance(default, bool):
        if not isinstance(raw, bool):
            raise ConfigError(dotted, "true/false 여야 합니다.")
        return raw
    if isinstance(default, int) and not isinstance(raw, bool) and isinstance(raw, int):
        return raw
    if isinstance(default, float) or default is None:
        if isinstance(raw, (int, float)) and not isinstance(raw, bool):
            return float(raw) if isinstance(default, float) else raw
        if default is None and isinstance(raw, str):
            return raw
        raise ConfigError(dotted, "숫자여야 합니다.")
    if isinstance(default, int):
        raise ConfigError(dotted, "정수여야 합니다.")
    if isinstance(default, str):
        if not isinstance(raw, str):
            raise ConfigError(dotted, "문자열이어야 합니다.")
        return raw
    return raw


def _build(cls: type, path: tuple[str, ...], data: dict) -> Any:
    known = {f.name: f for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(".".join((*path, key)), "알 수 없는 항목입니다.")
    defaults = cls()
    kwargs = {}
    for name, raw in data.items():
        sub_path = (*path, name)
        if not path and name in _SECTIONS:
            if not isinstance(raw, dict):
                raise ConfigError(name, "테이블이어야 합니다.")
            kwargs[name] = _build(_SECTIONS[name], sub_path, raw)
        else:
            kwargs[name] = _convert(sub_path, raw, getattr(defaults, name))
    return cls(**kwargs)


def from_toml(text: str) -> ExperimentConfig:
    """TOML 문자열에서 설정 생성

    Raises:
        ConfigError: 문법 오류, 알 수 없는 항목, 잘못된 형식이나 범위
    """
    try:
        data = tomlkit.parse(text).unwrap()
    except ParseError as exc:
        raise ConfigError("<file>", f"TOML 문법 오류: {exc}") from exc
    return _build(ExperimentConfig, (), data)


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("<file>", f"설정 파일을 읽을 수 없습니다: {exc}") from exc
    return from_toml(text)


def save_config(cfg: ExperimentConfig, path: str | Path) -> None:
    Path(path).write_text(to_toml(cfg), encoding="utf-8")


def default_config(name: ExperimentName) -> ExperimentConfig:
    """실험별 기본 설정 (experiment list / 예제 설정 생성에 사용)"""
    relaxed = EstimatorConstants.relaxed()
    sign_estimator = EstimatorSection(kind=EstimatorKind.BASIC_SIGN, tau_a=relaxed.tau_a,
                                      tau_b=relaxed.tau_b)
    presets = {
        ExperimentName.BNR_VS_ROUNDS: ExperimentConfig(
            experiment=name, output="bnr_vs_rounds.csv",
            attack=AttackSection(rounds=500)),
        ExperimentName.ROUNDS_VS_ELL: ExperimentConfig(
            experiment=name, output="rounds_vs_ell.csv",
            attack=AttackSection(rounds=100_000, bnr=1.0)),
        ExperimentName.ATTACK_END_TO_END: ExperimentConfig(
            experiment=name, trials=100, output="attack_end_to_end.csv",
            sketch=SketchSection(d=250, b=10),
            estimator=EstimatorSection(k_prime=3),
            attack=AttackSection(rounds=100_000, tail_size=300, bnr=4.0),
            sweep=SweepSection(max_rounds=20_000)),
        ExperimentName.ROBUST_SURVIVAL: ExperimentConfig(
            experiment=name, trials=100, output="robust_survival.csv",
            sketch=SketchSection(d=640, b=10), estimator=sign_estimator,
            attack=AttackSection(rounds=20 * 64, tail_size=300),
            robust=RobustSection(access_limit=64, epsilon=12.5, delta=1e-6),
            sweep=SweepSection(max_rounds=10_000)),
        ExperimentName.LEMMA1_VALIDATION: ExperimentConfig(
            experiment=name, trials=1, output="lemma1_validation.csv",
            sketch=SketchSection(d=900, b=900)),
        ExperimentName.WEIGHT_EST_EQUIVALENCE: ExperimentConfig(
            experiment=name, trials=1, output="weight_est_equivalence.csv",
            sketch=SketchSection(n=60, d=120, b=6),
            estimator=EstimatorSection(kind=EstimatorKind.ROBUST),
            robust=RobustSection(epsilon=1.0, delta=1e-6),
            sweep=SweepSection(samples=20_000)),
    }
    return presets[name]
