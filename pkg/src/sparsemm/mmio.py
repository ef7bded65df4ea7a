"""Matrix Market (coordinate) reading/writing and seeded random generators."""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from typing import IO, Optional, Union

import numpy as np

from .graphs import Graph
from .matrix import DenseMatrix, SparseMatrix, from_coo
from .semiring import ARITH_F64, ARITH_I64, BOOLEAN, Semiring

__all__ = [
    "MatrixMarketError",
    "MatrixMarketHeader",
    "read_matrix_market",
    "write_matrix_market",
    "write_dense_matrix_market",
    "load",
    "save",
    "peek_header",
    "default_semiring",
    "gen_erdos_renyi",
    "gen_random_sparse",
]

BANNER = "%%MatrixMarket"
FIELDS = ("real", "integer", "pattern")
SYMMETRIES = ("general", "symmetric")

Source = Union[str, bytes, os.PathLike, IO]


class MatrixMarketError(ValueError):
    def __init__(self, msg: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


@dataclass(frozen=True)
class MatrixMarketHeader:
    object: str = "matrix"
    format: str = "coordinate"
    field: str = "real"
    symmetry: str = "general"

    def banner(self) -> str:
        return f"{BANNER} {self.object} {self.format} {self.field} {self.symmetry}"


def parse_banner(line: str, lineno: int = 1) -> MatrixMarketHeader:
    parts = line.strip().split()
    if not parts or parts[0] != BANNER:
        raise MatrixMarketError(f"expected banner starting with {BANNER!r}", lineno)
    if len(parts) != 5:
        raise MatrixMarketError("banner needs object, format, field and symmetry", lineno)
    obj, fmt, fld, sym = (p.lower() for p in parts[1:])
    if obj != "matrix":
        raise MatrixMarketError(f"unsupported object {obj!r}", lineno)
    if fmt != "coordinate":
        raise MatrixMarketError(f"unsupported format {fmt!r}; only coordinate is read", lineno)
    if fld not in FIELDS:
        raise MatrixMarketError(f"unsupported field {fld!r}", lineno)
    if sym not in SYMMETRIES:
        raise MatrixMarketError(f"unsupported symmetry {sym!r}", lineno)
    return MatrixMarketHeader(obj, fmt, fld, sym)


def default_semiring(header: MatrixMarketHeader) -> Semiring:
    return {"real": ARITH_F64, "integer": ARITH_I64, "pattern": BOOLEAN}[header.field]


def _read_text(source: Source) -> str:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            data = fh.read()
    else:
        data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def _parse(text: str, sr: Optional[Semiring]):
    lines = text.splitlines()
    if not lines:
        raise MatrixMarketError("empty input", 1)
    header = parse_banner(lines[0], 1)
    sr = sr or default_semiring(header)
    body = ((n, ln.strip()) for n, ln in enumerate(lines[1:], start=2))
    body = ((n, ln) for n, ln in body if ln and not ln.startswith("%"))
    try:
        lineno, size = next(body)
    except StopIteration:
        raise MatrixMarketError("missing size line", len(lines)) from None
    try:
        nrows, ncols, nnz = (int(t) for t in size.split())
    except ValueError:
        raise MatrixMarketError(f"malformed size line {size!r}", lineno) from None
    if min(nrows, ncols, nnz) < 0:
        raise MatrixMarketError("negative size", lineno)
    want = 2 if header.field == "pattern" else 3
    triples = []
    count = 0
    for lineno, ln in body:
        toks = ln.split()
        if len(toks) != want:
            raise MatrixMarketError(f"expected {want} fields, got {len(toks)}", lineno)
        try:
            i, j = int(toks[0]) - 1, int(toks[1]) - 1
            if header.field == "pattern" or sr.domain == "boolean":
                v = sr.mul_identity
            elif header.field == "integer":
                v = int(toks[2])
            else:
                v = float(toks[2])
        except ValueError:
            raise MatrixMarketError(f"malformed entry {ln!r}", lineno) from None
        if not (0 <= i < nrows and 0 <= j < ncols):
            raise MatrixMarketError(
                f"index ({i + 1}, {j + 1}) outside declared {nrows}x{ncols}", lineno
            )
        triples.append((i, j, v))
        if header.symmetry == "symmetric" and i != j:
            triples.append((j, i, v))
        count += 1
    if count != nnz:
        raise MatrixMarketError(f"size line declares {nnz} entries, found {count}", len(lines))
    return header, from_coo(nrows, ncols, triples, sr)


def read_matrix_market(source: Source, sr: Optional[Semiring] = None) -> SparseMatrix:
    """Read a coordinate Matrix Market file or stream.

    Symmetric files are expanded, pattern entries take ``sr.mul_identity``
    (as does every listed entry when ``sr`` is boolean, so masks keep explicit zeros),
    duplicates are summed with ``sr.add``. Without ``sr`` the field picks
    arith-f64, arith-i64 or boolean.
    """
    return _parse(_read_text(source), sr)[1]


def peek_header(source: Source) -> MatrixMarketHeader:
    text = _read_text(source)
    return parse_banner(text.split("\n", 1)[0], 1)


def _field_of(A: SparseMatrix) -> str:
    kind = A.values.dtype.kind
    if kind == "b":
        return "pattern"
    if kind in "iu":
        return "integer"
    if kind == "f":
        return "real"
    raise TypeError(f"cannot write values of dtype {A.values.dtype} to Matrix Market")


def _emit(lines: list[str], sink: IO) -> None:
    text = "\n".join(lines) + "\n"
    if isinstance(sink, io.TextIOBase):
        sink.write(text)
    else:
        sink.write(text.encode("utf-8"))


def write_matrix_market(A: SparseMatrix, sink: IO) -> None:
    """Write general coordinate format, row-major, 1-based; floats use repr."""
    fld = _field_of(A)
    out = [MatrixMarketHeader(field=fld).banner(), f"{A.nrows} {A.ncols} {A.nnz}"]
    for i, j, v in A.triples():
        if fld == "pattern":
            out.append(f"{i + 1} {j + 1}")
        else:
            out.append(f"{i + 1} {j + 1} {v!r}")
    _emit(out, sink)


def write_dense_matrix_market(D: DenseMatrix, sink: IO) -> None:
    """Write every entry of a dense matrix in coordinate form.

    Entries equal to zero are written explicitly; reading the file back and
    densifying restores the matrix.
    """
    kind = D.values.dtype.kind
    fld = "integer" if kind in "iu" else "real"
    out = [MatrixMarketHeader(field=fld).banner(), f"{D.nrows} {D.ncols} {D.nrows * D.ncols}"]
    for i, row in enumerate(D.values.tolist()):
        for j, v in enumerate(row):
            out.append(f"{i + 1} {j + 1} {v!r}")
    _emit(out, sink)


def load(path, sr: Optional[Semiring] = None) -> SparseMatrix:
    return read_matrix_market(path, sr)


def save(A: "SparseMatrix | DenseMatrix", path) -> None:
    with open(path, "wb") as fh:
        if isinstance(A, DenseMatrix):
            write_dense_matrix_market(A, fh)
        else:
            write_matrix_market(A, fh)


def gen_erdos_renyi(
    n: int,
    density: float,
    weighted: bool = False,
    seed: int = 0,
    directed: bool = False,
) -> Graph:
    """G(n, p) without self-loops; weights are integers drawn from 1..9."""
    if not 0.0 <= density <= 1.0:
        raise ValueError(f"density must lie in [0, 1], got {density}")
    rng = np.random.default_rng(seed)
    coins = rng.random((n, n)) < density
    weights = rng.integers(1, 10, size=(n, n))
    triples = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if not directed and j < i:
                continue
            if coins[i, j]:
                w = float(weights[i, j]) if weighted else 1.0
                triples.append((i, j, w))
                if not directed:
                    triples.append((j, i, w))
    return Graph(from_coo(n, n, triples, ARITH_F64), weighted=weighted, directed=directed)


def gen_random_sparse(
    nrows: int,
    ncols: int,
    density: float,
    seed: int = 0,
    sr: Semiring = ARITH_F64,
    low: int = 1,
    high: int = 9,
) -> SparseMatrix:
    """Each entry present with probability ``density``.

    Values: uniform floats in [-1, 1) for float semirings, integers in
    [low, high] for integer ones, True for boolean.
    """
    if not 0.0 <= density <= 1.0:
        raise ValueError(f"density must lie in [0, 1], got {density}")
    rng = np.random.default_rng(seed)
    mask = rng.random((nrows, ncols)) < density
    if sr.domain == "boolean":
        vals = np.ones((nrows, ncols), dtype=bool)
    elif sr.domain == "integer":
        vals = rng.integers(low, high + 1, size=(nrows, ncols))
    else:
        vals = rng.uniform(-1.0, 1.0, size=(nrows, ncols))
    idx = np.argwhere(mask)
    vl = vals.tolist()
    return from_coo(nrows, ncols, ((int(i), int(j), vl[i][j]) for i, j in idx), sr)
