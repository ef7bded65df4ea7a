"""Compressed-row sparse matrices, dense matrices and masks.

Everything here is immutable: arrays are flagged read-only and every
operation allocates a fresh result. Stored values never equal the semiring's
additive identity; constructors drop them.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from .semiring import ARITH_F64, Semiring

__all__ = [
    "DimensionError",
    "SparseMatrix",
    "DenseMatrix",
    "MaskSpec",
    "from_coo",
    "from_rows",
    "from_dense",
    "dense_from_rows",
    "identity",
    "transpose",
    "elementwise_combine",
    "prune",
    "apply",
    "validate",
]


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


def _values_array(values: Sequence, dtype) -> np.ndarray:
    if dtype is object:
        out = np.empty(len(values), dtype=object)
        for i, v in enumerate(values):
            out[i] = v
    else:
        out = np.asarray(values, dtype=dtype).reshape(len(values))
    return out


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    nrows: int
    ncols: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def nnz(self) -> int:
        return int(self.row_ptr[-1])

    def row(self, i: int) -> tuple[list[int], list]:
        lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
        return self.col_idx[lo:hi].tolist(), self.values[lo:hi].tolist()

    def lists(self) -> tuple[list[int], list[int], list]:
        """Plain-Python copies of the three CSR arrays, for inner loops."""
        return self.row_ptr.tolist(), self.col_idx.tolist(), self.values.tolist()

    def triples(self) -> Iterable[tuple[int, int, Any]]:
        ptr, cols, vals = self.lists()
        for i in range(self.nrows):
            for p in range(ptr[i], ptr[i + 1]):
                yield i, cols[p], vals[p]

    def pattern(self) -> set[tuple[int, int]]:
        return {(i, j) for i, j, _ in self.triples()}

    def get(self, i: int, j: int, default: Any = None) -> Any:
        cols, vals = self.row(i)
        k = bisect_left(cols, j)
        if k < len(cols) and cols[k] == j:
            return vals[k]
        return default

    def to_dense(self, sr: Semiring = ARITH_F64) -> "DenseMatrix":
        """Materialize with absent entries filled by ``sr.add_identity``."""
        dtype = object if self.values.dtype == object else sr.dtype
        out = np.empty((self.nrows, self.ncols), dtype=dtype)
        for i in range(self.nrows):
            for j in range(self.ncols):
                out[i, j] = sr.add_identity
        for i, j, v in self.triples():
            out[i, j] = v
        return DenseMatrix(self.nrows, self.ncols, _frozen(out))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.row_ptr, other.row_ptr)
            and np.array_equal(self.col_idx, other.col_idx)
            and self.values.tolist() == other.values.tolist()
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz}, dtype={self.values.dtype})"


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """Row-major dense matrix; ``values`` is a read-only 2-D array."""

    nrows: int
    ncols: int
    values: np.ndarray

    @classmethod
    def from_array(cls, arr, dtype=None) -> "DenseMatrix":
        a = np.array(arr, dtype=dtype, copy=True)
        if a.ndim != 2:
            raise DimensionError(f"dense matrix needs 2 dimensions, got {a.ndim}")
        return cls(a.shape[0], a.shape[1], _frozen(a))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def transpose(self) -> "DenseMatrix":
        return DenseMatrix.from_array(self.values.T)

    def tolist(self) -> list[list]:
        return self.values.tolist()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return self.shape == other.shape and self.values.tolist() == other.values.tolist()

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class MaskSpec:
    """Structure-only mask: stored positions of ``pattern``, values ignored."""

    pattern: SparseMatrix

    @property
    def shape(self) -> tuple[int, int]:
        return self.pattern.shape

    @property
    def nnz(self) -> int:
        return self.pattern.nnz

    @classmethod
    def of(cls, M: "SparseMatrix | MaskSpec") -> "MaskSpec":
        return M if isinstance(M, MaskSpec) else cls(M)


def dense_from_rows(rows: Sequence[Sequence], nrows: int, ncols: int, dtype) -> DenseMatrix:
    out = np.empty((nrows, ncols), dtype=dtype)
    for i, r in enumerate(rows):
        for j, v in enumerate(r):
            out[i, j] = v
    return DenseMatrix(nrows, ncols, _frozen(out))


def _assemble(nrows, ncols, rows_cols, rows_vals, dtype) -> SparseMatrix:
    ptr = np.zeros(nrows + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(c) for c in rows_cols]) if nrows else []
    flat_cols = [c for row in rows_cols for c in row]
    flat_vals = [v for row in rows_vals for v in row]
    return SparseMatrix(
        nrows,
        ncols,
        _frozen(ptr),
        _frozen(np.asarray(flat_cols, dtype=np.int64).reshape(len(flat_cols))),
        _frozen(_values_array(flat_vals, dtype)),
    )


def from_rows(nrows: int, ncols: int, rows: Sequence[dict], sr: Semiring) -> SparseMatrix:
    """Build from one ``{col: value}`` dict per row, dropping nulls.

    Columns are emitted in ascending order. This is the assembly step shared
    by the kernels.
    """
    cols_out, vals_out = [], []
    for acc in rows:
        cs, vs = [], []
        for j in sorted(acc):
            v = acc[j]
            if not sr.is_null(v):
                cs.append(j)
                vs.append(v)
        cols_out.append(cs)
        vals_out.append(vs)
    return _assemble(nrows, ncols, cols_out, vals_out, sr.dtype)


def from_coo(nrows: int, ncols: int, triples: Iterable[tuple[int, int, Any]], sr: Semiring) -> SparseMatrix:
    """Build a matrix from (row, col, value) triples.

    Duplicates are folded with ``sr.add`` in input order and entries equal to
    the additive identity are dropped.
    """
    rows: list[dict] = [{} for _ in range(nrows)]
    for t in triples:
        i, j, v = t
        if not (0 <= i < nrows and 0 <= j < ncols):
            raise IndexError(f"triple {t!r} out of bounds for {nrows}x{ncols} matrix")
        acc = rows[i]
        acc[j] = sr.add(acc[j], v) if j in acc else v
    return from_rows(nrows, ncols, rows, sr)


def from_dense(D: "DenseMatrix | np.ndarray | Sequence[Sequence]", sr: Semiring) -> SparseMatrix:
    arr = D.values if isinstance(D, DenseMatrix) else np.asarray(D)
    data = arr.tolist()
    nrows = len(data)
    ncols = arr.shape[1] if arr.ndim == 2 else 0
    rows = [{j: v for j, v in enumerate(r)} for r in data]
    return from_rows(nrows, ncols, rows, sr)


def identity(n: int, sr: Semiring) -> SparseMatrix:
    if sr.mul_identity is None:
        raise ValueError(f"semiring {sr.name} has no multiplicative identity")
    return from_coo(n, n, ((i, i, sr.mul_identity) for i in range(n)), sr)


def transpose(A: SparseMatrix) -> SparseMatrix:
    """Counting-sort transpose; rows of the result come out column-sorted."""
    ptr, cols, vals = A.lists()
    counts = [0] * (A.ncols + 1)
    for j in cols:
        counts[j + 1] += 1
    for j in range(A.ncols):
        counts[j + 1] += counts[j]
    next_slot = counts[:-1]
    out_cols = [0] * len(cols)
    out_vals: list = [None] * len(cols)
    for i in range(A.nrows):
        for p in range(ptr[i], ptr[i + 1]):
            j = cols[p]
            q = next_slot[j]
            out_cols[q] = i
            out_vals[q] = vals[p]
            next_slot[j] = q + 1
    return SparseMatrix(
        A.ncols,
        A.nrows,
        _frozen(np.asarray(counts, dtype=np.int64)),
        _frozen(np.asarray(out_cols, dtype=np.int64).reshape(len(out_cols))),
        _frozen(_values_array(out_vals, A.values.dtype if A.values.dtype != object else object)),
    )


def elementwise_combine(
    A: SparseMatrix,
    B: SparseMatrix,
    op: Callable[[Any, Any], Any],
    union: bool,
    sr: Semiring,
) -> SparseMatrix:
    """Combine two same-shape matrices entry by entry.

    With ``union`` an entry present on one side only is combined with
    ``sr.add_identity`` standing in for the missing side. Otherwise only
    positions stored in both survive (Hadamard-style).
    """
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch: {A.shape} vs {B.shape}")
    null = sr.add_identity
    aptr, acol, aval = A.lists()
    bptr, bcol, bval = B.lists()
    rows = []
    for i in range(A.nrows):
        acc = {}
        p, pe = aptr[i], aptr[i + 1]
        q, qe = bptr[i], bptr[i + 1]
        while p < pe or q < qe:
            ja = acol[p] if p < pe else math.inf
            jb = bcol[q] if q < qe else math.inf
            if ja == jb:
                acc[ja] = op(aval[p], bval[q])
                p += 1
                q += 1
            elif ja < jb:
                if union:
                    acc[ja] = op(aval[p], null)
                p += 1
            else:
                if union:
                    acc[jb] = op(null, bval[q])
                q += 1
        rows.append(acc)
    return from_rows(A.nrows, A.ncols, rows, sr)


def prune(
    A: SparseMatrix,
    sr: Semiring,
    threshold: Optional[float] = None,
    keep: Optional[Callable[[Any], bool]] = None,
) -> SparseMatrix:
    """Drop entries failing a predicate.

    ``threshold`` keeps entries with ``|v| >= threshold``; ``keep`` is an
    arbitrary value predicate. Both may be given.
    """
    rows = []
    for i in range(A.nrows):
        cs, vs = A.row(i)
        acc = {}
        for j, v in zip(cs, vs):
            if threshold is not None and not abs(v) >= threshold:
                continue
            if keep is not None and not keep(v):
                continue
            acc[j] = v
        rows.append(acc)
    return from_rows(A.nrows, A.ncols, rows, sr)


def apply(A: SparseMatrix, fn: Callable[[Any], Any], sr: Semiring) -> SparseMatrix:
    """Map ``fn`` over stored values; results equal to the null are dropped."""
    rows = []
    for i in range(A.nrows):
        cs, vs = A.row(i)
        rows.append({j: fn(v) for j, v in zip(cs, vs)})
    return from_rows(A.nrows, A.ncols, rows, sr)


def validate(A: SparseMatrix, sr: Optional[Semiring] = None) -> None:
    """Raise AssertionError if any CSR structural invariant is broken."""
    ptr, cols, vals = A.lists()
    assert len(ptr) == A.nrows + 1, "row_ptr length"
    assert ptr[0] == 0, "row_ptr[0] != 0"
    assert ptr[-1] == len(cols) == len(vals), "row_ptr[-1] != nnz"
    for i in range(A.nrows):
        assert ptr[i] <= ptr[i + 1], f"row_ptr decreases at row {i}"
        row = cols[ptr[i] : ptr[i + 1]]
        for a, b in zip(row, row[1:]):
            assert a < b, f"row {i} columns not strictly increasing"
        for j in row:
            assert 0 <= j < A.ncols, f"row {i} column {j} out of range"
    if sr is not None:
        for v in vals:
            assert not sr.is_null(v), f"stored null value {v!r}"
