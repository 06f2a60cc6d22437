"""robustsketch 실행 모듈

이 모듈은 명령행 진입점으로, 다음과 같은 기능을 제공합니다:
1. 실험 설정 파일 실행 / 목록 / 예제 설정 생성
2. 스케치 스냅샷 정보 출력
3. 추정기 하나에 대한 공격 데모

종료 코드: 0 성공, 1 실험 판정 기준 미달, 2 설정 오류
"""

import logging
import sys
from typing import Optional

import click
import numpy as np

from robustsketch.errors import ConfigError, EstimateUnavailableError, SnapshotFormatError
from robustsketch.estimators.median import median_estimate
from robustsketch.harness.config import ExperimentName, default_config, load_config, save_config
from robustsketch.harness.experiments import DESCRIPTIONS, demo_attack, run_experiment
from robustsketch.models.kinds import EstimatorKind
from robustsketch.sketch.snapshot import decode_snapshot, restore

EXIT_CRITERIA_UNMET = 1
EXIT_CONFIG_ERROR = 2
SEED_ENVVAR = "ROBUSTSKETCH_SEED"


def print_title():
    """타이틀 출력"""
    click.echo("\n" + "=" * 60)
    click.secho("  robustsketch : 적응형 입력에 대한 선형 스케치 실험", bold=True)
    click.echo("=" * 60 + "\n")


def configure_logging(verbose: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def fail_config(error: ConfigError) -> None:
    click.secho(f"설정 오류 - {error}", fg="red", err=True)
    sys.exit(EXIT_CONFIG_ERROR)


@click.group()
@click.option("-v", "--verbose", count=True, help="-v: INFO, -vv: DEBUG 로그")
def cli(verbose: int):
    """적응형 공격과 강건 추정기 실험 도구"""
    configure_logging(verbose)


@cli.group()
def experiment():
    """설정 파일 기반 실험"""


@experiment.command("list")
def experiment_list():
    """실행 가능한 실험 목록"""
    for name in ExperimentName:
        click.echo(f"{name.value:<24} {DESCRIPTIONS[name]}")


@experiment.command("init")
@click.argument("name", type=click.Choice([e.value for e in ExperimentName]))
@click.argument("path", type=click.Path(dir_okay=False))
def experiment_init(name: str, path: str):
    """NAME 실험의 기본 설정을 PATH에 씀"""
    save_config(default_config(ExperimentName(name)), path)
    click.echo(f"{path}에 {name} 기본 설정을 저장했습니다.")


@experiment.command("run")
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.option("--seed", type=int, envvar=SEED_ENVVAR, default=None,
              help=f"master_seed 덮어쓰기 (환경 변수 {SEED_ENVVAR})")
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="CSV 출력 경로")
def experiment_run(config_path: str, seed: Optional[int], output: Optional[str]):
    """CONFIG_PATH의 실험을 실행하고 CSV와 요약을 출력"""
    try:
        cfg = load_config(config_path)
        if seed is not None:
            cfg = cfg.with_seed(seed)
        if output is not None:
            cfg = cfg.with_output(output)
    except ConfigError as error:
        fail_config(error)
        return

    print_title()
    click.echo(f"실험: {cfg.experiment.value} (trials={cfg.trials}, master_seed={cfg.master_seed})")
    outcome = run_experiment(cfg)
    click.echo(f"결과: {cfg.output} ({len(outcome.table.rows)} rows)\n")
    for summary in outcome.summaries:
        click.echo("  " + summary.line())
    for name, passed in outcome.criteria.items():
        click.secho(f"  [{'PASS' if passed else 'FAIL'}] {name}", fg="green" if passed else "red")
    if not outcome.passed:
        sys.exit(EXIT_CRITERIA_UNMET)


@cli.group()
def sketch():
    """스케치 스냅샷 도구"""


@sketch.command("inspect")
@click.argument("snapshot_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--key", "keys", type=int, multiple=True, help="median 추정값을 출력할 키 (여러 번)")
def sketch_inspect(snapshot_path: str, keys: tuple[int, ...]):
    """SNAPSHOT_PATH 스냅샷의 헤더와 카운터 요약 출력"""
    with open(snapshot_path, "rb") as f:
        data = f.read()
    try:
        header, counters = decode_snapshot(data)
    except SnapshotFormatError as error:
        click.secho(f"스냅샷 오류 - {error}", fg="red", err=True)
        sys.exit(EXIT_CONFIG_ERROR)

    params = header.params
    click.echo(f"variant      : {header.variant.value}")
    click.echo(f"n, d, b      : {params.n}, {params.d}, {params.b} (ell={params.ell:g})")
    click.echo(f"master_seed  : {header.master_seed}")
    click.echo(f"counter_kind : {header.counter_kind.value}")
    values = counters.astype(np.float64)
    click.echo(f"nonzero      : {int(np.count_nonzero(values))} / {values.size}")
    click.echo(f"sum c_t^2    : {float(values @ values):g}")
    click.echo(f"min / max    : {values.min():g} / {values.max():g}")
    if keys:
        rand, state = restore(data)
        for key in keys:
            try:
                click.echo(f"median[{key}] = {median_estimate(rand, state, key):g}")
            except EstimateUnavailableError:
                click.echo(f"median[{key}] = (T_i 없음)")


@cli.group()
def attack():
    """공격 데모"""


@attack.command("demo")
@click.option("--estimator", type=click.Choice([k.value for k in EstimatorKind]),
              default=EstimatorKind.MEDIAN.value, show_default=True)
@click.option("--ell", type=click.IntRange(min=1), default=25, show_default=True, help="d/b")
@click.option("--seed", type=int, envvar=SEED_ENVVAR, default=0, show_default=True)
def attack_demo(estimator: str, ell: int, seed: int):
    """추정기 하나에 대해 공격을 한 번 실행하고 결과 출력"""
    print_title()
    kind = EstimatorKind(estimator)
    result, controller = demo_attack(kind, ell, seed)
    click.echo(f"추정기        : {kind.value} (ell={ell}, seed={seed})")
    click.echo(f"라운드/수집   : {len(controller.analyst.rounds)} / {result.collections}")
    click.echo(f"질의 수       : {result.queries_used}")
    click.echo(f"측정 BNR      : {result.measured_bnr:.3f}")
    if result.final_vector is None:
        click.secho("최종 질의 전에 공격이 멈췄습니다.", fg="yellow")
        return
    correct = controller.final_correct
    click.echo(f"공격자 관찰   : {'성공' if result.success else '실패'}")
    click.secho(f"최종 응답     : {'올바름' if correct else '틀림'}",
                fg="green" if correct else "red")


if __name__ == "__main__":
    cli()  # pylint: disable=no-value-for-parameter
