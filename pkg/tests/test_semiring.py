import math

import numpy as np
import pytest

from sparsemm.semiring import EQUIJOIN, MANHATTAN, REGISTRY, SELECT2ND_MIN, get_semiring

from conftest import ALL_SEMIRINGS, sample_value

N_SAMPLES = 1000


def same(sr, x, y):
    # float arithmetic is only approximately associative/distributive
    if sr.name == "arith-f64":
        return math.isclose(x, y, rel_tol=1e-12, abs_tol=1e-15)
    return x == y


def _samples(sr, rng, k):
    # mix in the null element; laws must hold for it too
    return [sr.add_identity if rng.random() < 0.1 else sample_value(sr, rng) for _ in range(k)]


@pytest.mark.parametrize("sr", ALL_SEMIRINGS, ids=lambda s: s.name)
def test_additive_monoid_laws(sr):
    rng = np.random.default_rng(1)
    for _ in range(N_SAMPLES):
        a, b, c = _samples(sr, rng, 3)
        assert sr.add(sr.add_identity, a) == a
        assert sr.add(a, b) == sr.add(b, a)
        assert same(sr, sr.add(sr.add(a, b), c), sr.add(a, sr.add(b, c)))


@pytest.mark.parametrize("sr", [s for s in ALL_SEMIRINGS if s.strict], ids=lambda s: s.name)
def test_distributivity(sr):
    rng = np.random.default_rng(2)
    for _ in range(N_SAMPLES):
        a, b, c = _samples(sr, rng, 3)
        assert same(sr, sr.mul(a, sr.add(b, c)), sr.add(sr.mul(a, b), sr.mul(a, c)))
        assert same(sr, sr.mul(sr.add(a, b), c), sr.add(sr.mul(a, c), sr.mul(b, c)))
        assert same(sr, sr.mul(sr.mul(a, b), c), sr.mul(a, sr.mul(b, c)))


@pytest.mark.parametrize("sr", [s for s in ALL_SEMIRINGS if s.annihilating], ids=lambda s: s.name)
def test_annihilator(sr):
    rng = np.random.default_rng(3)
    z = sr.add_identity
    for a in _samples(sr, rng, N_SAMPLES):
        assert sr.mul(a, z) == z
        assert sr.mul(z, a) == z


@pytest.mark.parametrize("sr", [s for s in ALL_SEMIRINGS if s.mul_identity is not None and s.strict],
                         ids=lambda s: s.name)
def test_multiplicative_identity(sr):
    rng = np.random.default_rng(4)
    for a in _samples(sr, rng, N_SAMPLES):
        assert sr.mul(sr.mul_identity, a) == a
        assert sr.mul(a, sr.mul_identity) == a


def test_non_annihilating_flags_are_honest():
    # select2nd passes its right operand through even when the left is null
    assert SELECT2ND_MIN.mul(SELECT2ND_MIN.add_identity, 3.0) == 3.0
    # |a - 0| = a: the Manhattan null is not absorbing
    assert MANHATTAN.mul(5.0, MANHATTAN.add_identity) == 5.0


def test_manhattan_is_not_distributive():
    a, b, c = 1.0, 2.0, 3.0
    assert MANHATTAN.mul(a, MANHATTAN.add(b, c)) != MANHATTAN.add(MANHATTAN.mul(a, b), MANHATTAN.mul(a, c))


def test_equijoin_semiring_laws():
    a, b, c = (("x",),), (("y",), ("z",)), (("w",),)
    add, mul = EQUIJOIN.add, EQUIJOIN.mul
    assert add(a, b) == add(b, a)
    assert mul(a, add(b, c)) == add(mul(a, b), mul(a, c))
    assert mul(a, EQUIJOIN.add_identity) == EQUIJOIN.add_identity
    assert mul(EQUIJOIN.mul_identity, b) == b


def test_registry_labels():
    assert set(REGISTRY) == {
        "arith-f64", "arith-i64", "boolean", "min-plus", "max-min", "select2nd-min", "manhattan",
    }
    assert get_semiring("min-plus").add_identity == float("inf")
    with pytest.raises(ValueError, match="unknown semiring"):
        get_semiring("plus-pair")
