"""
스케치의 내부 랜덤성 (측정 벡터 μ_t 묶음).

측정 벡터를 직접 저장하지 않고 해시 함수의 시드로 표현함.
- CountSketch: d/b 개의 (h_r, s_r) 쌍. 키는 행마다 정확히 한 버킷에 들어감
- BCountSketch: d 개의 독립 (h_t, s_t) 쌍. 키는 각 버킷에 확률 1/b로 참여
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix

from robustsketch.errors import SketchParameterError
from robustsketch.hashing.polynomial import HashBank, sign_of_raw
from robustsketch.models.params import HashFamilySpec, SketchParams
from robustsketch.models.variant import SketchVariant

logger = logging.getLogger(__name__)

# 해시 역할 번호 (derive_seed 경로)
ROLE_SELECTOR = 0
ROLE_SIGN = 1

# BCountSketch 선택 비트를 한 번에 계산하는 (버킷 수 × 키 수) 원소 상한
_SELECT_CHUNK = 1 << 22

# 이 크기 이하의 n에서는 전체 키의 참여 정보를 캐시해서 부분 집합 질의에 재사용
FULL_CACHE_LIMIT = 1 << 16

# 키별 참여 정보 캐시의 최대 항목 수 (가장 오래 안 쓴 키부터 버림)
KEY_CACHE_SIZE = 4096


def default_hash_specs(variant: SketchVariant, domain_bits: int = 32) -> tuple[HashFamilySpec, HashFamilySpec]:
    """스케치 종류별 기본 (h, s) 독립도. CountSketch는 2/2, BCountSketch는 3/5"""
    if variant is SketchVariant.COUNT_SKETCH:
        return HashFamilySpec(2, domain_bits), HashFamilySpec(2, domain_bits)
    return HashFamilySpec(3, domain_bits), HashFamilySpec(5, domain_bits)


@dataclass(frozen=True)
class Participation:
    """키 배열의 참여 정보 (희소 COO 형태)

    원소 하나가 (키 위치, 버킷, 부호) 삼중쌍이며 키 위치 → 버킷 오름차순으로 정렬됨.

    Attributes:
        keys (np.ndarray): 질의한 키 배열
        key_pos (np.ndarray): keys 안에서의 위치
        buckets (np.ndarray): 버킷 인덱스 t
        signs (np.ndarray): μ_t[i] (±1)
    """

    keys: np.ndarray
    key_pos: np.ndarray
    buckets: np.ndarray
    signs: np.ndarray

    def __len__(self) -> int:
        return int(self.buckets.size)

    def counts(self) -> np.ndarray:
        """키별 |T_i|"""
        return np.bincount(self.key_pos, minlength=self.keys.size)

    def offsets(self) -> np.ndarray:
        """키별 시작 위치 (길이 len(keys)+1)"""
        return np.concatenate([[0], np.cumsum(self.counts())])

    def matrix(self, d: int) -> coo_matrix:
        """(d × len(keys)) 측정 행렬"""
        return coo_matrix((self.signs.astype(np.int64), (self.buckets, self.key_pos)),
                          shape=(d, self.keys.size))

    def products(self, counters: np.ndarray) -> np.ndarray:
        """원소별 μ_t[i]·c_t"""
        return self.signs * counters[self.buckets]

    def padded(self, values: np.ndarray) -> np.ndarray:
        """원소별 값을 (len(keys), max|T_i|) 행렬로 배치, 빈칸은 NaN"""
        counts = self.counts()
        width = int(counts.max()) if counts.size else 0
        out = np.full((self.keys.size, width), np.nan)
        if self.buckets.size:
            starts = self.offsets()[:-1]
            column = np.arange(self.buckets.size) - starts[self.key_pos]
            out[self.key_pos, column] = values
        return out

    def select(self, keys: np.ndarray) -> Participation:
        """중복 없는 keys만 남긴 참여 정보 (self.keys가 오름차순일 때). 순서는 주어진 keys 순서"""
        positions = np.searchsorted(self.keys, keys)
        remap = np.full(self.keys.size, -1, dtype=np.int64)
        remap[positions] = np.arange(positions.size)
        new_pos = remap[self.key_pos]
        keep = np.flatnonzero(new_pos >= 0)
        keep = keep[np.argsort(new_pos[keep], kind="stable")]
        return Participation(np.asarray(keys, dtype=np.int64), new_pos[keep],
                             self.buckets[keep], self.signs[keep])

    def of_key(self, position: int) -> tuple[np.ndarray, np.ndarray]:
        mask = self.key_pos == position
        return self.buckets[mask], self.signs[mask]


@dataclass(frozen=True, eq=False)
class SketchRandomness:
    """측정 벡터 묶음 (μ_t)_{t ∈ [d]}

    Attributes:
        variant (SketchVariant): CountSketch 또는 BCountSketch
        params (SketchParams): (n, d, b)
        master_seed (int): 모든 해시 시드의 출처
        selectors (HashBank): h 함수들 (CountSketch는 행 수, BCountSketch는 d개)
        signs (HashBank): s 함수들
    """

    variant: SketchVariant
    params: SketchParams
    master_seed: int
    selectors: HashBank
    signs: HashBank
    _cache: dict = field(default_factory=dict, repr=False)
    _key_cache: OrderedDict = field(default_factory=OrderedDict, repr=False)

    @property
    def d(self) -> int:
        return self.params.d

    @property
    def b(self) -> int:
        return self.params.b

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def fingerprint(self) -> tuple:
        """SketchState가 어떤 랜덤성으로 만들어졌는지 식별하는 값"""
        return (self.variant.value, self.n, self.d, self.b, self.master_seed,
                self.selectors.spec, self.signs.spec)

    def check_keys(self, keys: np.ndarray) -> np.ndarray:
        keys = np.asarray(keys, dtype=np.int64).ravel()
        if keys.size and (keys.min() < 0 or keys.max() >= self.n):
            raise SketchParameterError(f"키는 [0, {self.n}) 범위여야 합니다.")
        return keys

    def participation(self, keys: np.ndarray) -> Participation:
        """키 배열 전체의 참여 정보를 한 번에 계산

        전체 키 범위 [n]에 대한 결과는 캐시함 (역색인).
        """
        keys = self.check_keys(keys)
        full = keys.size == self.n and np.array_equal(keys, np.arange(self.n))
        if full or (self.n <= FULL_CACHE_LIMIT and keys.size * 8 >= self.n):
            cached = self._cache.get("all")
            if cached is None:
                cached = self._compute(np.arange(self.n, dtype=np.int64))
                self._cache["all"] = cached
            return cached if full else cached.select(keys)
        return self._compute(keys)

    def all_keys(self) -> Participation:
        return self.participation(np.arange(self.n))

    def _compute(self, keys: np.ndarray) -> Participation:
        b = np.uint64(self.b)
        if self.variant is SketchVariant.COUNT_SKETCH:
            rows = len(self.selectors)
            columns = (self.selectors.raw(keys) % b).astype(np.int64)  # (rows, m)
            buckets = (np.arange(rows, dtype=np.int64)[:, None] * self.b + columns).T.ravel()
            signs = sign_of_raw(self.signs.raw(keys)).T.ravel()
            key_pos = np.repeat(np.arange(keys.size, dtype=np.int64), rows)
            return Participation(keys, key_pos, buckets, signs)

        positions, bucket_parts = [], []
        step = max(1, _SELECT_CHUNK // self.d)
        for start in range(0, keys.size, step):
            selected = (self.selectors.raw(keys[start:start + step]) % b == 0).T  # (m, d)
            key_pos, buckets = np.nonzero(selected)
            positions.append(key_pos + start)
            bucket_parts.append(buckets)
        key_pos = np.concatenate(positions or [np.empty(0, dtype=np.int64)]).astype(np.int64)
        buckets = np.concatenate(bucket_parts or [np.empty(0, dtype=np.int64)]).astype(np.int64)

        # 참여하는 (버킷, 키) 쌍의 부호만 버킷별로 모아서 평가
        signs = np.empty(buckets.size, dtype=np.int8)
        order = np.argsort(buckets, kind="stable")
        sorted_buckets = buckets[order]
        bounds = np.concatenate([[0], np.flatnonzero(np.diff(sorted_buckets)) + 1, [order.size]])
        for start, stop in zip(bounds[:-1], bounds[1:]):
            if start == stop:
                continue
            idx = order[start:stop]
            raw = self.signs.raw(keys[key_pos[idx]], rows=np.array([sorted_buckets[start]]))
            signs[idx] = sign_of_raw(raw[0])
        return Participation(keys, key_pos, buckets, signs)

    def key_participation(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """키 i의 (T_i, 부호) 쌍. 버킷 오름차순"""
        cached = self._key_cache.get(i)
        if cached is not None:
            self._key_cache.move_to_end(i)
            return cached
        part = self.participation(np.array([i]))
        cached = (part.buckets, part.signs)
        self._key_cache[i] = cached
        while len(self._key_cache) > KEY_CACHE_SIZE:
            self._key_cache.popitem(last=False)
        return cached


def init_sketch(variant: SketchVariant, params: SketchParams, seed: int,
                h_spec: Optional[HashFamilySpec] = None,
                s_spec: Optional[HashFamilySpec] = None) -> SketchRandomness:
    """스케치 랜덤성 생성

    Args:
        variant: 스케치 종류
        params: (n, d, b)
        seed: 마스터 시드
        h_spec, s_spec: 해시 명세 (기본값은 default_hash_specs)

    Returns:
        SketchRandomness: 같은 시드면 모든 (t, i)에서 같은 측정 값
    """
    params.validate_for(variant)
    default_h, default_s = default_hash_specs(variant, max(1, int(params.n - 1).bit_length()))
    h_spec = h_spec or default_h
    s_spec = s_spec or default_s
    if params.n > h_spec.key_limit or params.n > s_spec.key_limit:
        raise SketchParameterError("n이 해시 정의역 2^domain_bits를 넘습니다.")

    count = params.rows if variant is SketchVariant.COUNT_SKETCH else params.d
    rand = SketchRandomness(
        variant=variant,
        params=params,
        master_seed=int(seed),
        selectors=HashBank.generate(h_spec, seed, ROLE_SELECTOR, count),
        signs=HashBank.generate(s_spec, seed, ROLE_SIGN, count),
    )
    logger.debug("init_sketch %s n=%d d=%d b=%d seed=%d", variant.value, params.n,
                 params.d, params.b, seed)
    return rand


def measurement_entry(rand: SketchRandomness, t: int, i: int) -> int:
    """μ_t[i] ∈ {-1, 0, +1}"""
    if not 0 <= t < rand.d:
        raise SketchParameterError(f"버킷 인덱스는 [0, {rand.d}) 범위여야 합니다.")
    rand.check_keys(np.array([i]))
    if rand.variant is SketchVariant.COUNT_SKETCH:
        row, column = divmod(t, rand.b)
        if rand.selectors[row](i) % rand.b != column:
            return 0
        return 1 if rand.signs[row](i) % 2 == 0 else -1
    if rand.selectors[t](i) % rand.b != 0:
        return 0
    return 1 if rand.signs[t](i) % 2 == 0 else -1


def participating_buckets(rand: SketchRandomness, i: int) -> np.ndarray:
    """T_i = {t | μ_t[i] ≠ 0}, 오름차순"""
    return rand.key_participation(i)[0]
