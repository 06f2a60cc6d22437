"""
k-wise 독립 해시 함수 모듈.

- polynomial 모드: 소수 P 위의 (k-1)차 다항식, Horner 방식으로 평가
- fully_random 모드: (seed, key) 별로 SeedSequence에서 뽑은 값을 메모이즈
- 두 모드 모두 raw 값은 [0, P) 범위이며, selector/sign은 raw 값에서 유도됨
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from robustsketch.errors import SketchParameterError
from robustsketch.models.params import MERSENNE_PRIME, HashFamilySpec
from robustsketch.models.variant import HashMode

logger = logging.getLogger(__name__)

_P = np.uint64(MERSENNE_PRIME)
_MASK31 = np.uint64((1 << 31) - 1)
_MASK30 = np.uint64((1 << 30) - 1)
_S1 = np.uint64(1)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_S61 = np.uint64(61)

# 한 번에 평가하는 (함수 수 × 키 수) 원소 상한
_BANK_CHUNK = 1 << 22


def mulmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a · b) mod (2^61 - 1), a와 b는 [0, P) 범위의 uint64 배열

    64비트 곱셈이 넘치지 않도록 31비트 단위로 나누어 곱함.
    """
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    a1, a0 = a >> _S31, a & _MASK31
    b1, b0 = b >> _S31, b & _MASK31

    hi = (a1 * b1) << _S1  # 2^62 ≡ 2 (mod P)
    mid = a1 * b0 + a0 * b1
    lo = a0 * b0
    total = hi + (mid >> _S30) + ((mid & _MASK30) << _S31) + lo
    return _reduce(total)


def _reduce(x: np.ndarray) -> np.ndarray:
    x = (x & _P) + (x >> _S61)
    return np.where(x >= _P, x - _P, x)


def derive_seed(master_seed: int, *path: int) -> int:
    """마스터 시드와 경로(역할, 인덱스 등)로부터 64비트 하위 시드 생성"""
    state = np.random.SeedSequence([master_seed & ((1 << 64) - 1), *path])
    return int(state.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True, eq=False)
class HashFunction:
    """해시 함수 하나

    Attributes:
        spec (HashFamilySpec): 해시 패밀리 명세
        seed (int): 64비트 시드
        coefficients (np.ndarray): 다항식 계수 (상수항부터, polynomial 모드에서만 사용)
    """

    spec: HashFamilySpec
    seed: int
    coefficients: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.uint64))
    _memo: dict[int, int] = field(default_factory=dict, repr=False)

    @classmethod
    def from_coefficients(cls, spec: HashFamilySpec, coefficients: Sequence[int]) -> HashFunction:
        """계수를 직접 지정해서 생성 (소수 P를 작게 잡은 전수 검사용)"""
        coeffs = np.asarray(coefficients, dtype=np.uint64)
        if coeffs.size != spec.independence:
            raise SketchParameterError("계수 개수가 independence와 다릅니다.")
        if np.any(coeffs >= np.uint64(spec.prime)):
            raise SketchParameterError("계수는 [0, P) 범위여야 합니다.")
        return cls(spec=spec, seed=0, coefficients=coeffs)

    def raw(self, keys: np.ndarray | int) -> np.ndarray:
        """키 (또는 키 배열)에 대한 [0, P) 범위의 raw 해시값"""
        keys = np.asarray(keys)
        if keys.size and (keys.min() < 0 or keys.max() >= self.spec.key_limit):
            raise SketchParameterError(f"키는 [0, 2^{self.spec.domain_bits}) 범위여야 합니다.")
        if self.spec.mode is HashMode.FULLY_RANDOM:
            flat = [self._memoized(int(key)) for key in keys.ravel()]
            return np.asarray(flat, dtype=np.uint64).reshape(keys.shape)
        return _horner(self.coefficients[:, None], keys.astype(np.uint64).ravel()[None, :],
                       self.spec.prime)[0].reshape(keys.shape)

    def __call__(self, key: int) -> int:
        return int(self.raw(key))

    def _memoized(self, key: int) -> int:
        # 단일 스레드 사용 전제 (polynomial 모드만 동시 읽기 안전)
        value = self._memo.get(key)
        if value is None:
            state = np.random.SeedSequence([self.seed, key]).generate_state(1, dtype=np.uint64)
            value = int(state[0]) % self.spec.prime
            self._memo[key] = value
        return value


def _horner(coefficients: np.ndarray, keys: np.ndarray, prime: int) -> np.ndarray:
    """coefficients (f, k, 1) 또는 (k, 1) 형태와 keys (1, m)를 브로드캐스트해서 평가

    반환값은 (f, m) 형태. 다항식은 c_0 + c_1 x + ... + c_{k-1} x^{k-1}.
    """
    if coefficients.ndim == 2:
        coefficients = coefficients[None, :, :]
    if prime == MERSENNE_PRIME:
        x = _reduce(keys)
        acc = np.broadcast_to(coefficients[:, -1, :], (coefficients.shape[0], keys.shape[1]))
        for j in range(coefficients.shape[1] - 2, -1, -1):
            acc = mulmod(acc, x) + coefficients[:, j, :]
            acc = np.where(acc >= _P, acc - _P, acc)
        return np.ascontiguousarray(acc, dtype=np.uint64)

    # 2^32 미만 소수: 곱이 64비트를 넘지 않으므로 직접 나머지 연산
    p = np.uint64(prime)
    x = keys % p
    acc = np.broadcast_to(coefficients[:, -1, :], (coefficients.shape[0], keys.shape[1]))
    for j in range(coefficients.shape[1] - 2, -1, -1):
        acc = (acc * x + coefficients[:, j, :]) % p
    return np.ascontiguousarray(acc, dtype=np.uint64)


def make_hash(spec: HashFamilySpec, seed: int) -> HashFunction:
    """시드로부터 계수를 결정적으로 생성한 해시 함수

    Args:
        spec: 해시 패밀리 명세
        seed: 64비트 시드

    Returns:
        HashFunction: 같은 (spec, seed)면 어느 프로세스에서든 같은 함수
    """
    seed = int(seed) & ((1 << 64) - 1)
    if spec.mode is HashMode.FULLY_RANDOM:
        return HashFunction(spec=spec, seed=seed)
    rng = np.random.default_rng(seed)
    coefficients = rng.integers(0, spec.prime, size=spec.independence, dtype=np.uint64)
    return HashFunction(spec=spec, seed=seed, coefficients=coefficients)


def eval_selector(h: HashFunction, key: int, b: int) -> int:
    """raw mod b == 0 이면 1, 아니면 0 (Pr[1] = 1/b)"""
    if b <= 0:
        raise SketchParameterError("b는 양의 정수여야 합니다.")
    return int(h(key) % b == 0)


def eval_sign(s: HashFunction, key: int) -> int:
    """raw 값이 짝수면 +1, 홀수면 -1"""
    return 1 if s(key) % 2 == 0 else -1


def sign_of_raw(raw: np.ndarray) -> np.ndarray:
    return np.where(raw & np.uint64(1), -1, 1).astype(np.int8)


@dataclass(frozen=True, eq=False)
class HashBank:
    """같은 명세를 가진 해시 함수 여러 개를 한꺼번에 평가

    BCountSketch처럼 버킷마다 해시 함수가 따로 있을 때, 키 배열에 대해
    (함수 수 × 키 수) raw 값 행렬을 벡터 연산으로 계산함.
    """

    functions: tuple[HashFunction, ...]

    def __post_init__(self):
        if not self.functions:
            raise SketchParameterError("해시 함수가 하나 이상 필요합니다.")
        specs = {fn.spec for fn in self.functions}
        if len(specs) != 1:
            raise SketchParameterError("HashBank의 모든 함수는 같은 명세여야 합니다.")

    @classmethod
    def generate(cls, spec: HashFamilySpec, master_seed: int, role: int, count: int) -> HashBank:
        """master_seed와 역할 번호에서 count개의 함수를 결정적으로 생성"""
        return cls(tuple(make_hash(spec, derive_seed(master_seed, role, j)) for j in range(count)))

    @property
    def spec(self) -> HashFamilySpec:
        return self.functions[0].spec

    def __len__(self) -> int:
        return len(self.functions)

    def __getitem__(self, index: int) -> HashFunction:
        return self.functions[index]

    def raw(self, keys: np.ndarray, rows: np.ndarray | None = None) -> np.ndarray:
        """(len(rows), len(keys)) 형태의 raw 값 행렬

        Args:
            keys: 키 배열
            rows: 평가할 함수 인덱스 (기본: 전부)
        """
        keys = np.asarray(keys, dtype=np.int64).ravel()
        rows = np.arange(len(self.functions)) if rows is None else np.asarray(rows, dtype=np.int64)
        if keys.size and (keys.min() < 0 or keys.max() >= self.spec.key_limit):
            raise SketchParameterError(f"키는 [0, 2^{self.spec.domain_bits}) 범위여야 합니다.")
        if self.spec.mode is HashMode.FULLY_RANDOM:
            if rows.size == 0:
                return np.empty((0, keys.size), dtype=np.uint64)
            return np.stack([self.functions[r].raw(keys) for r in rows])

        coefficients = self._coefficient_matrix()[rows][:, :, None]
        out = np.empty((rows.size, keys.size), dtype=np.uint64)
        step = max(1, _BANK_CHUNK // max(1, rows.size))
        for start in range(0, keys.size, step):
            chunk = keys[start:start + step].astype(np.uint64)[None, :]
            out[:, start:start + step] = _horner(coefficients, chunk, self.spec.prime)
        return out

    def _coefficient_matrix(self) -> np.ndarray:
        cached = self.__dict__.get("_coefficients")
        if cached is None:
            cached = np.stack([fn.coefficients for fn in self.functions])
            object.__setattr__(self, "_coefficients", cached)
        return cached
