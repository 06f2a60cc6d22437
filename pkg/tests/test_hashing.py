# pylint: disable=missing-class-docstring, missing-function-docstring
"""tests for the hashing module"""

from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from robustsketch.errors import SketchParameterError
from robustsketch.hashing.polynomial import (
    HashBank,
    HashFunction,
    derive_seed,
    eval_selector,
    eval_sign,
    make_hash,
    mulmod,
)
from robustsketch.models.params import MERSENNE_PRIME, HashFamilySpec
from robustsketch.models.variant import HashMode

SMALL = HashFamilySpec(independence=2, domain_bits=4, prime=17)


def test_small_prime_family_is_pairwise_uniform():
    # P = 17 에서 모든 계수 쌍을 돌면 서로 다른 두 키의 값 쌍이 정확히 한 번씩 나옴
    pairs = Counter()
    for c0 in range(17):
        for c1 in range(17):
            h = HashFunction.from_coefficients(SMALL, [c0, c1])
            pairs[(h(2), h(9))] += 1

    assert len(pairs) == 17 * 17
    assert set(pairs.values()) == {1}


def test_small_prime_matches_direct_formula():
    h = HashFunction.from_coefficients(HashFamilySpec(3, 4, prime=17), [5, 3, 11])

    for x in range(16):
        assert h(x) == (5 + 3 * x + 11 * x * x) % 17


def test_from_coefficients_validation():
    with pytest.raises(SketchParameterError):
        HashFunction.from_coefficients(SMALL, [1, 2, 3])
    with pytest.raises(SketchParameterError):
        HashFunction.from_coefficients(SMALL, [1, 17])


@given(st.integers(0, MERSENNE_PRIME - 1), st.integers(0, MERSENNE_PRIME - 1))
def test_mulmod_matches_python_integers(a, b):
    got = mulmod(np.array([a], dtype=np.uint64), np.array([b], dtype=np.uint64))
    assert int(got[0]) == (a * b) % MERSENNE_PRIME


def test_make_hash_is_deterministic():
    spec = HashFamilySpec(independence=5)
    keys = np.arange(1000)

    a, b = make_hash(spec, 42), make_hash(spec, 42)
    assert np.array_equal(a.raw(keys), b.raw(keys))
    assert not np.array_equal(a.raw(keys), make_hash(spec, 43).raw(keys))
    assert int(a.raw(keys).max()) < MERSENNE_PRIME


def test_fully_random_mode_is_memoized_and_seeded():
    spec = HashFamilySpec(mode=HashMode.FULLY_RANDOM)
    h = make_hash(spec, 7)

    first = h(123)
    assert h(123) == first
    assert make_hash(spec, 7)(123) == first


def test_key_out_of_domain_raises():
    h = make_hash(HashFamilySpec(domain_bits=8), 1)

    with pytest.raises(SketchParameterError):
        h(256)
    with pytest.raises(SketchParameterError):
        h(-1)


def test_selector_and_sign_frequencies():
    spec = HashFamilySpec(independence=2)
    selectors, signs = [], []
    for seed in range(400):
        h = make_hash(spec, derive_seed(0, seed))
        selectors.append(eval_selector(h, 77, 10))
        signs.append(eval_sign(h, 77))

    # Pr[g = 1] = 1/b, 부호는 대략 반반
    assert 20 <= sum(selectors) <= 65
    assert 140 <= signs.count(1) <= 260
    with pytest.raises(SketchParameterError):
        eval_selector(make_hash(spec, 0), 1, 0)


def test_hash_bank_rows_match_single_functions():
    bank = HashBank.generate(HashFamilySpec(independence=3), master_seed=9, role=1, count=6)
    keys = np.array([0, 5, 99, 12345])

    matrix = bank.raw(keys)
    assert matrix.shape == (6, 4)
    for j in range(6):
        assert np.array_equal(matrix[j], bank[j].raw(keys))
    assert np.array_equal(bank.raw(keys, rows=np.array([4, 1])), matrix[[4, 1]])


def test_derive_seed_depends_on_path():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)
    assert derive_seed(1, 2) != derive_seed(2, 2)
