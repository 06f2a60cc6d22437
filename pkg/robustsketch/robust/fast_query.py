"""
빠른 질의 조합.

비강건 후보 생성기로 O(filter_k)개 후보를 먼저 고르고, 후보에 대해서만 강건 임계값 질의를 수행함.
후보 생성기는 폭 (C_a+1)·b 인 별도 CountSketch 위의 기본 부호 정렬 추정값을 사용함.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from robustsketch.estimators.sign_alignment import p_hat_all
from robustsketch.hashing.polynomial import derive_seed
from robustsketch.models.params import SketchParams
from robustsketch.models.report import Report
from robustsketch.models.sparse_vector import SparseVector
from robustsketch.models.variant import SketchVariant
from robustsketch.robust.threshold import RobustEstimatorState, robust_threshold_query
from robustsketch.sketch.randomness import SketchRandomness, init_sketch
from robustsketch.sketch.state import SketchState, sketch_vector

logger = logging.getLogger(__name__)

# 후보 생성용 별도 스케치의 시드 경로
SIDE_SKETCH_ROLE = 2


@dataclass
class FastQueryVariant:
    """
    Attributes:
        rs (RobustEstimatorState): 강건 추정기
        side (SketchRandomness): 후보 생성용 CountSketch
        filter_k (int): 후보 최대 개수
    """

    rs: RobustEstimatorState
    side: SketchRandomness
    filter_k: int

    def sketch(self, v: SparseVector) -> tuple[SketchState, SketchState]:
        """(주 스케치 상태, 후보 스케치 상태)"""
        return sketch_vector(self.rs.rand, v), sketch_vector(self.side, v)

    def candidates(self, side_state: SketchState) -> np.ndarray:
        """max(p̂⁺, p̂⁻) ≥ τ_a 인 키 중 상위 filter_k 개"""
        keys = np.arange(self.side.n, dtype=np.int64)
        plus, minus = p_hat_all(self.side, side_state, keys)
        score = np.maximum(plus, minus)
        passing = np.flatnonzero(score >= self.rs.constants.tau_a)
        order = np.lexsort((passing, -score[passing]))[:self.filter_k]
        return np.sort(keys[passing[order]])


def make_fast_query(rs: RobustEstimatorState, filter_k: int) -> FastQueryVariant:
    """rs와 같은 n, 같은 행 수(d/b)에 폭 (C_a+1)·b 인 CountSketch를 붙임"""
    rows = max(1, math.ceil(rs.ell))
    width = int(math.ceil((rs.constants.C_a + 1) * rs.rand.b))
    params = SketchParams(rs.rand.n, rows * width, width)
    side = init_sketch(SketchVariant.COUNT_SKETCH, params,
                       derive_seed(rs.rand.master_seed, SIDE_SKETCH_ROLE))
    return FastQueryVariant(rs, side, filter_k)


def fastquery_variant(fq: FastQueryVariant, state: SketchState, side_state: SketchState) -> Report:
    """후보 목록을 만든 뒤 후보에 대해서만 robust_threshold_query"""
    candidates = fq.candidates(side_state)
    logger.debug("fast query: %d candidates", candidates.size)
    return robust_threshold_query(fq.rs, state, candidates.tolist())
