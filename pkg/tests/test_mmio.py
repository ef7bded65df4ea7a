import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsemm.matrix import DenseMatrix, from_coo
from sparsemm.mmio import (
    MatrixMarketError,
    gen_erdos_renyi,
    gen_random_sparse,
    load,
    peek_header,
    read_matrix_market,
    save,
    write_matrix_market,
)
from sparsemm.semiring import ARITH_F64, ARITH_I64, BOOLEAN, MIN_PLUS


def text_of(A) -> str:
    buf = io.StringIO()
    write_matrix_market(A, buf)
    return buf.getvalue()


def test_read_banner_example():
    src = io.StringIO("%%MatrixMarket matrix coordinate real general\n% comment\n2 2 1\n1 2 3.5\n")
    A = read_matrix_market(src)
    assert A.shape == (2, 2) and list(A.triples()) == [(0, 1, 3.5)]


def test_read_symmetric_expands():
    src = io.StringIO("%%MatrixMarket matrix coordinate integer symmetric\n3 3 2\n2 1 4\n3 3 7\n")
    A = read_matrix_market(src)
    assert A.values.dtype == np.int64
    assert list(A.triples()) == [(0, 1, 4), (1, 0, 4), (2, 2, 7)]


def test_read_pattern_uses_semiring_one():
    text = "%%MatrixMarket matrix coordinate pattern general\n2 3 2\n1 1\n2 3\n"
    assert list(read_matrix_market(io.StringIO(text)).triples()) == [(0, 0, True), (1, 2, True)]
    assert read_matrix_market(io.StringIO(text), MIN_PLUS).values.tolist() == [0.0, 0.0]


def test_read_bytes_stream_and_header():
    data = b"%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 2.0\n"
    assert read_matrix_market(io.BytesIO(data)).get(0, 0) == 2.0
    assert peek_header(io.BytesIO(data)).field == "real"


def test_write_empty_matrix():
    lines = text_of(from_coo(3, 3, [], ARITH_F64)).splitlines()
    assert lines[0] == "%%MatrixMarket matrix coordinate real general"
    assert lines[1] == "3 3 0" and len(lines) == 2


@pytest.mark.parametrize("text,lineno", [
    ("%%MatrixMarket matrix array real general\n2 2\n", 1),
    ("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n", 1),
    ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 2.0\n", 3),
    ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 2.0\n", 3),
    ("%%MatrixMarket matrix coordinate real general\n2 2\n", 2),
    ("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 2.0\n", 3),
    ("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1 5\n", 3),
    ("not a banner\n", 1),
])
def test_errors_carry_line_numbers(text, lineno):
    with pytest.raises(MatrixMarketError) as err:
        read_matrix_market(io.StringIO(text))
    assert err.value.line == lineno
    assert f"line {lineno}" in str(err.value)


@pytest.mark.parametrize("sr", [ARITH_F64, ARITH_I64, BOOLEAN, MIN_PLUS], ids=lambda s: s.name)
def test_roundtrip_is_bit_stable(sr, tmp_path):
    for seed in range(10):
        A = gen_random_sparse(9, 13, 0.3, seed=seed, sr=sr)
        path = tmp_path / f"{sr.name}-{seed}.mtx"
        save(A, path)
        B = load(path, sr)
        assert B == A
        assert B.values.tobytes() == A.values.tobytes()
        save(B, path)
        assert text_of(load(path, sr)) == text_of(A)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 6),
                          st.floats(allow_nan=False, allow_infinity=False, width=64)), max_size=20))
def test_float_roundtrip_property(triples):
    A = from_coo(6, 7, triples, ARITH_F64)
    B = read_matrix_market(io.StringIO(text_of(A)))
    assert B.values.tobytes() == A.values.tobytes() and B == A


def test_dense_save_writes_every_entry(tmp_path):
    D = DenseMatrix.from_array(np.array([[1.5, 0.0], [0.0, -2.0]]))
    path = tmp_path / "dense.mtx"
    save(D, path)
    lines = path.read_text().splitlines()
    assert lines[1] == "2 2 4" and len(lines) == 6
    assert load(path).to_dense(ARITH_F64) == D


def test_erdos_renyi_extremes():
    assert gen_erdos_renyi(10, 0.0).adjacency.nnz == 0
    assert gen_erdos_renyi(10, 1.0).adjacency.nnz == 90
    assert gen_erdos_renyi(10, 1.0, directed=True).adjacency.nnz == 90
    with pytest.raises(ValueError):
        gen_erdos_renyi(5, 1.5)


def test_erdos_renyi_mean_edge_count():
    n, p = 40, 0.1
    pairs = n * (n - 1) / 2
    counts = [gen_erdos_renyi(n, p, seed=s).adjacency.nnz // 2 for s in range(50)]
    sigma = (pairs * p * (1 - p) / 50) ** 0.5
    assert abs(np.mean(counts) - pairs * p) <= 3 * sigma


def test_erdos_renyi_seeds_differ_and_repeat():
    graphs = {gen_erdos_renyi(30, 0.2, seed=s).adjacency.col_idx.tobytes() for s in range(100)}
    assert len(graphs) == 100
    assert gen_erdos_renyi(30, 0.2, seed=4) == gen_erdos_renyi(30, 0.2, seed=4)


def test_erdos_renyi_weights():
    G = gen_erdos_renyi(20, 0.3, weighted=True, seed=1)
    vals = set(G.adjacency.values.tolist())
    assert vals <= {float(w) for w in range(1, 10)} and len(vals) > 1
    assert all(i != j for i, j, _ in G.edges())


def test_boolean_read_keeps_explicit_zeros():
    text = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 0.0\n2 2 3.0\n"
    assert read_matrix_market(io.StringIO(text), BOOLEAN).pattern() == {(0, 0), (1, 1)}
    assert read_matrix_market(io.StringIO(text)).pattern() == {(1, 1)}
