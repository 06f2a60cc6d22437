# pylint: disable=missing-class-docstring, missing-function-docstring
"""tests for the models package (SparseVector, Sign, constants, params)"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from robustsketch.errors import SketchParameterError
from robustsketch.models.constants import EstimatorConstants
from robustsketch.models.params import HashFamilySpec, SketchParams
from robustsketch.models.report import Report
from robustsketch.models.sign import Sign
from robustsketch.models.sparse_vector import SparseVector
from robustsketch.models.variant import CounterKind, SketchVariant

entries = st.dictionaries(st.integers(0, 50), st.integers(-20, 20), max_size=12)


def test_sparse_vector_normalizes_input():
    v = SparseVector(np.array([5, 1, 5, 3]), np.array([2, 4, -2, 0]))

    # 중복 키는 합산되고 0은 저장하지 않음
    assert v.keys.tolist() == [1]
    assert v.values.tolist() == [4]
    assert v.is_integral
    assert 5 not in v and 1 in v
    assert v.get(1) == 4 and v.get(7) == 0


def test_sparse_vector_is_read_only():
    v = SparseVector.from_dict({3: 1.5})

    with pytest.raises(ValueError):
        v.values[0] = 2.0
    with pytest.raises(TypeError):
        hash(v)


def test_sparse_vector_rejects_bad_input():
    with pytest.raises(ValueError):
        SparseVector(np.array([-1]), np.array([1]))
    with pytest.raises(ValueError):
        SparseVector(np.array([1]), np.array([True]))
    with pytest.raises(ValueError):
        SparseVector(np.array([1, 2]), np.array([1]))


def test_tail_norm_drops_largest_entries():
    v = SparseVector.from_dict({0: 10, 1: -7, 2: 3, 3: 1})

    assert v.norm_sq() == 159.0
    assert v.tail_norm_sq(0) == 159.0
    assert v.tail_norm_sq(2) == 10.0
    # 정수가 아닌 k는 올림
    assert v.tail_norm_sq(1.5) == 10.0
    assert v.tail_norm_sq(10) == 0.0


@given(entries, entries)
def test_sparse_vector_arithmetic_matches_dicts(a, b):
    va, vb = SparseVector.from_dict(a), SparseVector.from_dict(b)
    expected = {k: a.get(k, 0) - b.get(k, 0) for k in set(a) | set(b)}
    expected = {k: x for k, x in expected.items() if x != 0}

    assert (va - vb).to_dict() == expected
    assert (va + vb - vb) == va
    assert (2 * va).to_dict() == {k: 2 * x for k, x in va.to_dict().items()}


def test_restrict_and_without_partition_vector():
    v = SparseVector.from_dict({1: 1, 2: 2, 3: 3})

    assert v.restrict([1, 3]).to_dict() == {1: 1, 3: 3}
    assert v.without([1, 3]).to_dict() == {2: 2}
    assert v.restrict([1, 3]) + v.without([1, 3]) == v
    assert SparseVector.zeros().max_key == -1 and v.max_key == 3


def test_sign_helpers():
    assert Sign.PLUS.opposite is Sign.MINUS
    assert Sign.of(-3) is Sign.MINUS and Sign.of(2) is Sign.PLUS
    with pytest.raises(ValueError):
        Sign.of(0)


def test_report_membership():
    r = Report(frozenset({4, 9}), {4: 1.0, 9: 2.0})

    assert 4 in r and 5 not in r and len(r) == 2
    # values는 비교에서 제외
    assert r == Report(frozenset({4, 9}))


def test_estimator_constants_thresholds_are_ordered():
    for c in (EstimatorConstants(), EstimatorConstants.relaxed()):
        assert c.tau_a < c.tau_m1 < c.tau_m < c.tau_m2 < c.tau_b
        assert c.flip_low < c.flip_high
    assert EstimatorConstants().is_standard
    assert not EstimatorConstants.relaxed().is_standard


@pytest.mark.parametrize("tau_a, tau_b", [(0.5, 0.9), (0.9, 0.8), (0.6, 1.0)])
def test_estimator_constants_rejects_bad_taus(tau_a, tau_b):
    with pytest.raises(ValueError):
        EstimatorConstants(tau_a=tau_a, tau_b=tau_b)


def test_sketch_params_validation():
    params = SketchParams(n=100, d=60, b=6)
    assert params.ell == 10 and params.rows == 10

    with pytest.raises(SketchParameterError):
        SketchParams(n=0, d=10, b=1)
    with pytest.raises(SketchParameterError):
        SketchParams(n=10, d=5, b=6)
    # CountSketch는 b | d 필요
    with pytest.raises(SketchParameterError):
        SketchParams(n=10, d=10, b=3).validate_for(SketchVariant.COUNT_SKETCH)
    SketchParams(n=10, d=10, b=3).validate_for(SketchVariant.BCOUNT_SKETCH)


def test_hash_family_spec_validation():
    assert HashFamilySpec(domain_bits=4, prime=17).key_limit == 16

    with pytest.raises(SketchParameterError):
        HashFamilySpec(independence=1)
    with pytest.raises(SketchParameterError):
        HashFamilySpec(domain_bits=5, prime=17)
    with pytest.raises(SketchParameterError):
        HashFamilySpec(domain_bits=4, prime=(1 << 33) + 17)


def test_variant_codes():
    for variant in SketchVariant:
        assert SketchVariant.from_code(variant.code) is variant
    assert CounterKind.from_code(1) is CounterKind.INT64
    with pytest.raises(ValueError):
        SketchVariant.from_code(7)
