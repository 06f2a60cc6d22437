"""추정기 쪽 게임 환경을 구현한 모듈

공격자는 answer()가 돌려주는 Report만 볼 수 있음.
스케치 랜덤성과 모니터 상태는 환경 안에만 있고, 평가 코드만 ground_truth()로 꺼내 씀.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from robustsketch.dp.laplace import LaplaceNoise, NoiseSource
from robustsketch.errors import SketchParameterError
from robustsketch.estimators.median import median_topk
from robustsketch.estimators.sign_alignment import threshold_report
from robustsketch.hashing.polynomial import derive_seed
from robustsketch.models.constants import EstimatorConstants
from robustsketch.models.kinds import EstimatorKind
from robustsketch.models.params import SketchParams
from robustsketch.models.report import Report
from robustsketch.models.sparse_vector import SparseVector
from robustsketch.models.variant import SketchVariant
from robustsketch.robust.accounting import SequenceAccounting
from robustsketch.robust.threshold import RobustEstimatorState, robust_init, robust_threshold_query
from robustsketch.sketch.randomness import SketchRandomness, init_sketch
from robustsketch.sketch.state import sketch_vector

logger = logging.getLogger(__name__)

# 이 크기 이하의 정의역은 질의마다 모든 키를 평가함
FULL_SCAN_LIMIT = 1 << 16
# robust 잡음 시드 경로
NOISE_ROLE = 3


@dataclass
class EstimatorEnvironment:
    """스케치와 추정기를 묶은 게임 환경

    Attributes:
        kind (EstimatorKind): median / basic / robust
        constants (EstimatorConstants): 부호 정렬 추정기의 τ 상수
        k_prime (int): median 추정기가 보고하는 키 개수
        full_scan_limit (int): n이 이 값 이하면 [n] 전체를 평가
        watch_keys (frozenset[int]): n이 클 때 supp(v)와 함께 항상 평가할 키
        queries (int): 지금까지 답한 질의 수
    """

    kind: EstimatorKind
    constants: EstimatorConstants = field(default_factory=EstimatorConstants)
    k_prime: int = 10
    full_scan_limit: int = FULL_SCAN_LIMIT
    watch_keys: frozenset[int] = frozenset()
    queries: int = 0
    _rand: Optional[SketchRandomness] = field(default=None, repr=False)
    _robust: Optional[RobustEstimatorState] = field(default=None, repr=False)

    def __post_init__(self):
        if self._rand is None:
            raise SketchParameterError("환경에는 스케치 랜덤성이 필요합니다.")
        if self.kind is EstimatorKind.ROBUST and self._robust is None:
            raise SketchParameterError("robust 환경에는 강건 추정기 상태가 필요합니다.")
        if self.k_prime < 1:
            raise SketchParameterError("k_prime은 1 이상이어야 합니다.")

    def candidates(self, v: SparseVector) -> Optional[np.ndarray]:
        """이번 질의에서 평가할 키 (None이면 [n] 전체)"""
        if self._rand.n <= self.full_scan_limit:
            return None
        watch = np.fromiter(self.watch_keys, dtype=np.int64, count=len(self.watch_keys))
        return np.union1d(v.keys, watch[watch < self._rand.n])

    def answer(self, v: SparseVector) -> Report:
        """v를 새로 스케치하고 추정기 출력을 돌려줌"""
        state = sketch_vector(self._rand, v)
        candidates = self.candidates(v)
        self.queries += 1
        if self.kind is EstimatorKind.MEDIAN:
            report = median_topk(self._rand, state, self.k_prime, candidates)
        elif self.kind is EstimatorKind.BASIC_SIGN:
            report = threshold_report(self._rand, state, self.constants, candidates)
        else:
            if self._robust.accounting is not None:
                self._robust.accounting.record_vector(v, self.constants)
            report = robust_threshold_query(self._robust, state, candidates)
        logger.debug("query %d (%s): |supp|=%d reported=%d", self.queries, self.kind.value,
                     len(v), len(report))
        return report

    def ground_truth(self) -> SketchRandomness:
        """평가 전용. 공격자 코드에서 호출하지 말 것"""
        return self._rand

    @property
    def robust_state(self) -> Optional[RobustEstimatorState]:
        return self._robust


def make_environment(kind: EstimatorKind, params: SketchParams, seed: int,
                     variant: Optional[SketchVariant] = None,
                     constants: Optional[EstimatorConstants] = None,
                     k_prime: int = 10,
                     watch_keys: Iterable[int] = (),
                     full_scan_limit: int = FULL_SCAN_LIMIT,
                     access_limit: int = 1,
                     max_queries: int = 1,
                     epsilon: Optional[float] = None,
                     delta: Optional[float] = None,
                     c1: float = 1.0,
                     c2: float = 1.0,
                     noise: Optional[NoiseSource] = None,
                     track_lambda: bool = False,
                     keep_transcript: bool = False) -> EstimatorEnvironment:
    """새 랜덤성으로 환경 생성

    variant를 주지 않으면 median은 CountSketch, 나머지는 BCountSketch를 사용함.
    robust 환경의 잡음은 기본적으로 마스터 시드에서 유도한 시드의 LaplaceNoise.

    Args:
        kind: 추정기 종류
        params: (n, d, b)
        seed: 마스터 시드
        variant: 스케치 종류
        constants: τ 상수
        k_prime: median 보고 개수
        watch_keys: 항상 평가할 키
        full_scan_limit: 전체 평가 상한
        access_limit, max_queries, epsilon, delta, c1, c2, noise: robust 추정기 설정
        track_lambda: robust 질의마다 λ_Q를 기록할지 여부
        keep_transcript: TM 질의 기록 보관 여부
    """
    if variant is None:
        variant = (SketchVariant.COUNT_SKETCH if kind is EstimatorKind.MEDIAN
                   else SketchVariant.BCOUNT_SKETCH)
    constants = constants or EstimatorConstants()
    rand = init_sketch(variant, params, seed)
    robust = None
    if kind is EstimatorKind.ROBUST:
        robust = robust_init(rand, constants, access_limit, max_queries,
                             noise=noise if noise is not None
                             else LaplaceNoise(derive_seed(seed, NOISE_ROLE)),
                             c1=c1, c2=c2, epsilon=epsilon, delta=delta,
                             keep_transcript=keep_transcript)
        if track_lambda:
            robust.accounting = SequenceAccounting(params.b)
    return EstimatorEnvironment(kind=kind, constants=constants, k_prime=k_prime,
                                full_scan_limit=full_scan_limit,
                                watch_keys=frozenset(int(k) for k in watch_keys),
                                _rand=rand, _robust=robust)
