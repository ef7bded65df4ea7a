import math

import numpy as np
import pytest

from sparsemm import oracle
from sparsemm.estimators import (
    SketchConfig,
    cohen_nnz_estimate,
    estimate_jaccard,
    gen_sjlt,
    minhash_sketch,
    permutation_matrix,
)
from sparsemm.matrix import from_coo, identity
from sparsemm.semiring import BOOLEAN

from conftest import random_sparse


# -- SJLT ---------------------------------------------------------------------


@pytest.mark.parametrize("s", [1, 3, 8])
def test_sjlt_column_structure(s):
    S = gen_sjlt(8, 40, SketchConfig(seed=3, s=s))
    counts = [0] * 40
    for _, j, v in S.triples():
        counts[j] += 1
        assert v in (1 / math.sqrt(s), -1 / math.sqrt(s))
    assert counts == [s] * 40


def test_sjlt_seeded_determinism():
    a = gen_sjlt(6, 30, SketchConfig(seed=11, s=2))
    b = gen_sjlt(6, 30, SketchConfig(seed=11, s=2))
    c = gen_sjlt(6, 30, SketchConfig(seed=12, s=2))
    assert a == b and a != c


def test_sjlt_s_equals_d_is_dense():
    S = gen_sjlt(4, 10, SketchConfig(seed=0, s=4))
    assert S.nnz == 40


def test_sjlt_errors_and_warnings():
    with pytest.raises(ValueError, match="exceeds"):
        gen_sjlt(3, 10, SketchConfig(s=4))
    with pytest.warns(UserWarning):
        gen_sjlt(20, 10, SketchConfig(s=1))
    with pytest.raises(ValueError):
        SketchConfig(s=0)


def test_sjlt_preserves_norm_on_average():
    rng = np.random.default_rng(0)
    x = rng.normal(size=64)
    ratios = []
    for seed in range(200):
        S = gen_sjlt(16, 64, SketchConfig(seed=seed, s=4)).to_dense().values
        ratios.append(np.linalg.norm(S @ x) ** 2 / np.linalg.norm(x) ** 2)
    assert abs(np.mean(ratios) - 1.0) < 0.1


# -- minhash ------------------------------------------------------------------


def test_minhash_identical_and_disjoint_rows():
    A = from_coo(3, 10, [(0, 1, True), (0, 4, True), (1, 1, True), (1, 4, True), (2, 7, True)], BOOLEAN)
    sig = minhash_sketch(A, SketchConfig(r=64, seed=2)).values
    assert estimate_jaccard(sig[0], sig[1]) == 1.0
    assert estimate_jaccard(sig[0], sig[2]) == 0.0


def test_minhash_empty_rows_get_sentinel():
    A = from_coo(2, 5, [(0, 3, True)], BOOLEAN)
    sig = minhash_sketch(A, SketchConfig(r=4, seed=0)).values
    assert (sig[1] == 5).all()
    assert (sig[0] < 5).all()


def test_minhash_equals_explicit_permutation():
    rng = np.random.default_rng(5)
    A = random_sparse(rng, 20, 30, 0.15, BOOLEAN)
    cfg = SketchConfig(r=16, seed=9)
    P = permutation_matrix(30, cfg).values
    sig = minhash_sketch(A, cfg).values
    for i in range(20):
        cols = A.row(i)[0]
        for p in range(16):
            want = min((int(P[c, p]) for c in cols), default=30)
            assert sig[i, p] == want


def test_permutation_columns_are_permutations():
    P = permutation_matrix(12, SketchConfig(r=5, seed=1)).values
    for p in range(5):
        assert sorted(P[:, p].tolist()) == list(range(12))


def test_estimate_jaccard_cases():
    assert estimate_jaccard([1, 2, 3, 4], [1, 2, 0, 0]) == 0.5
    with pytest.raises(ValueError):
        estimate_jaccard([1, 2], [1])
    with pytest.raises(ValueError):
        estimate_jaccard([], [])


# -- Cohen ---------------------------------------------------------------------


def test_cohen_identity_product_is_about_one():
    I = identity(50, BOOLEAN)
    est = cohen_nnz_estimate(I, I, SketchConfig(r=256, seed=1)).per_column_nnz
    assert abs(est.mean() - 1.0) < 0.05


def test_cohen_zero_column_is_exactly_zero():
    A = from_coo(4, 4, [(0, 0, True), (1, 1, True)], BOOLEAN)
    B = from_coo(4, 3, [(0, 0, True), (1, 0, True), (3, 2, True)], BOOLEAN)
    est = cohen_nnz_estimate(A, B, SketchConfig(r=32, seed=0)).per_column_nnz
    assert est[1] == 0.0 and est[2] == 0.0
    assert est[0] > 0.0


def test_cohen_counts_reaching_rows_not_paths():
    # every output row reaches column 0 through all 8 intermediates
    A = from_coo(20, 8, [(i, k, True) for i in range(20) for k in range(8)], BOOLEAN)
    B = from_coo(8, 1, [(k, 0, True) for k in range(8)], BOOLEAN)
    est = cohen_nnz_estimate(A, B, SketchConfig(r=512, seed=3)).per_column_nnz
    assert est[0] == pytest.approx(20, rel=0.15)


def test_cohen_accuracy_against_exact_counts():
    # columns share keys, so errors correlate within one seed; pool several
    good = total = 0
    for seed in range(5):
        A = random_sparse(np.random.default_rng(100 + seed), 64, 64, 0.1, BOOLEAN)
        exact = oracle.column_nnz_of_product(A, A)
        est = cohen_nnz_estimate(A, A, SketchConfig(r=256, seed=seed)).per_column_nnz
        big = [j for j in range(64) if exact[j] >= 16]
        good += sum(1 for j in big if abs(est[j] - exact[j]) <= 0.15 * exact[j])
        total += len(big)
    assert good >= 0.9 * total


def test_cohen_report_and_errors():
    A = identity(3, BOOLEAN)
    rep = cohen_nnz_estimate(A, A, SketchConfig(r=8, seed=0))
    d = rep.as_dict()
    assert d["r"] == 8 and d["rng"] and d["estimator"]
    assert rep.per_column_nnz.tolist() == cohen_nnz_estimate(A, A, SketchConfig(r=8, seed=0)).per_column_nnz.tolist()
    with pytest.raises(ValueError, match="r >= 2"):
        cohen_nnz_estimate(A, A, SketchConfig(r=1))
    with pytest.raises(ValueError):
        cohen_nnz_estimate(A, from_coo(4, 4, [], BOOLEAN), SketchConfig(r=4))
