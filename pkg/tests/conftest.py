import numpy as np
import pytest

from sparsemm import oracle
from sparsemm.matrix import DenseMatrix, from_coo
from sparsemm.semiring import REGISTRY

ANNIHILATING = [sr for sr in REGISTRY.values() if sr.annihilating]
ALL_SEMIRINGS = list(REGISTRY.values())


def sample_value(sr, rng):
    """A random non-null scalar suitable for exact comparison in ``sr``."""
    if sr.domain == "boolean":
        return True
    if sr.name == "arith-f64":
        return float(rng.uniform(-1.0, 1.0))
    if sr.name == "arith-i64":
        v = int(rng.integers(-5, 6))
        return v if v else 1
    if sr.name == "max-min":
        return float(rng.integers(-9, 10))
    # min-plus, select2nd-min, manhattan: small nonnegative integer-valued floats
    return float(rng.integers(0, 10))


def random_sparse(rng, m, n, density, sr):
    triples = [
        (i, j, sample_value(sr, rng))
        for i in range(m)
        for j in range(n)
        if rng.random() < density
    ]
    return from_coo(m, n, triples, sr)


def random_dense(rng, m, n, sr):
    rows = [[sample_value(sr, rng) for _ in range(n)] for _ in range(m)]
    dtype = sr.dtype
    arr = np.empty((m, n), dtype=dtype)
    for i, r in enumerate(rows):
        for j, v in enumerate(r):
            arr[i, j] = v
    return DenseMatrix.from_array(arr)


def close(a, b, sr, rtol=1e-12):
    if sr.name == "arith-f64":
        return a == b or abs(a - b) <= rtol * max(abs(a), abs(b))
    return a == b


def sparse_matches(Y, want: dict, sr, rtol=1e-12) -> bool:
    got = oracle.as_dict(Y)
    return got.keys() == want.keys() and all(close(got[k], want[k], sr, rtol) for k in got)


# -- acceptance reporting ------------------------------------------------------

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Call with (number, ok, detail) to log one PASS/FAIL line per criterion."""

    def record(number, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
