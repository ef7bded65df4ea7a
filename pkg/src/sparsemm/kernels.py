"""Semiring-generic multiplication kernels.

All kernels accumulate each output entry in ascending contraction index, so
floating-point results are reproducible run to run and match a plain
triple loop bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .matrix import (
    DenseMatrix,
    DimensionError,
    MaskSpec,
    SparseMatrix,
    dense_from_rows,
    from_rows,
    transpose,
)
from .semiring import Semiring

__all__ = [
    "SpgemmStats",
    "spgemm",
    "spgemm_union",
    "masked_spgemm",
    "spmm",
    "spdm3",
    "sddmm",
    "triple_product",
    "gram",
]


@dataclass(frozen=True)
class SpgemmStats:
    flops: int
    output_nnz: int

    @property
    def compression_ratio(self) -> Optional[float]:
        if self.output_nnz == 0:
            return None
        return self.flops / self.output_nnz

    def as_dict(self) -> dict:
        return {
            "flops": self.flops,
            "output_nnz": self.output_nnz,
            "compression_ratio": self.compression_ratio,
        }


def _check_inner(A, X) -> None:
    if A.ncols != X.nrows:
        raise DimensionError(
            f"inner dimension mismatch: left is {A.nrows}x{A.ncols}, right is {X.nrows}x{X.ncols}"
        )


def _require_annihilating(sr: Semiring, kernel: str) -> None:
    if not sr.annihilating:
        raise ValueError(
            f"{kernel} iterates stored-entry intersections and needs an annihilating "
            f"semiring; {sr.name} is not (use spgemm_union)"
        )


def _check_mask(M: MaskSpec, shape) -> None:
    if M.shape != shape:
        raise DimensionError(f"mask is {M.shape[0]}x{M.shape[1]}, output is {shape[0]}x{shape[1]}")


def spgemm(
    A: SparseMatrix, X: SparseMatrix, sr: Semiring, *, strict_upper: bool = False
) -> tuple[SparseMatrix, SpgemmStats]:
    """Row-wise (Gustavson) sparse product with a hash accumulator per row.

    With ``strict_upper`` only entries j > i are formed; used when the
    product is known to be symmetric.
    """
    _check_inner(A, X)
    _require_annihilating(sr, "spgemm")
    add, mul = sr.add, sr.mul
    aptr, acol, aval = A.lists()
    xptr, xcol, xval = X.lists()
    rows = []
    flops = 0
    for i in range(A.nrows):
        acc: dict = {}
        for p in range(aptr[i], aptr[i + 1]):
            k = acol[p]
            a = aval[p]
            for q in range(xptr[k], xptr[k + 1]):
                j = xcol[q]
                if strict_upper and j <= i:
                    continue
                flops += 1
                v = mul(a, xval[q])
                acc[j] = add(acc[j], v) if j in acc else v
        rows.append(acc)
    Y = from_rows(A.nrows, X.ncols, rows, sr)
    return Y, SpgemmStats(flops, Y.nnz)


def spgemm_union(A: SparseMatrix, X: SparseMatrix, sr: Semiring) -> SparseMatrix:
    """Product whose contraction runs over the union of stored indices.

    A missing operand is replaced by ``sr.add_identity``. For semirings where
    ``mul(null, null)`` is neutral under ``add`` (Manhattan, select2nd-min,
    every annihilating one) this equals the product of the densified inputs.
    Cost is rows(A) * cols(X) * union size.
    """
    _check_inner(A, X)
    null = sr.add_identity
    add, mul = sr.add, sr.mul
    aptr, acol, aval = A.lists()
    XT = transpose(X)
    tptr, tcol, tval = XT.lists()
    rows = []
    for i in range(A.nrows):
        a_cols = acol[aptr[i] : aptr[i + 1]]
        a_vals = aval[aptr[i] : aptr[i + 1]]
        acc = {}
        for j in range(X.ncols):
            x_rows = tcol[tptr[j] : tptr[j + 1]]
            x_vals = tval[tptr[j] : tptr[j + 1]]
            if not a_cols and not x_rows:
                # mul(null, null) folds to null for the supported semirings
                continue
            s = null
            p = q = 0
            na, nx = len(a_cols), len(x_rows)
            while p < na or q < nx:
                ka = a_cols[p] if p < na else None
                kx = x_rows[q] if q < nx else None
                if kx is None or (ka is not None and ka < kx):
                    s = add(s, mul(a_vals[p], null))
                    p += 1
                elif ka is None or kx < ka:
                    s = add(s, mul(null, x_vals[q]))
                    q += 1
                else:
                    s = add(s, mul(a_vals[p], x_vals[q]))
                    p += 1
                    q += 1
            acc[j] = s
        rows.append(acc)
    return from_rows(A.nrows, X.ncols, rows, sr)


def _estimated_flops(A: SparseMatrix, X: SparseMatrix) -> int:
    xlen = (X.row_ptr[1:] - X.row_ptr[:-1]).tolist()
    return sum(xlen[k] for k in A.col_idx.tolist())


def masked_spgemm(
    A: SparseMatrix,
    X: SparseMatrix,
    M: "MaskSpec | SparseMatrix",
    sr: Semiring,
    strategy: Optional[str] = None,
    *,
    with_stats: bool = False,
):
    """Y<M> = A X, computed only where the mask has a stored entry.

    ``strategy`` is ``"dot"`` (one sparse dot product per mask entry) or
    ``"filter"`` (Gustavson rows, masked at write-back). When omitted, dot is
    picked if nnz(M) * mean row length of A is below the unmasked flop count.
    Stats count only the products actually formed.
    """
    M = MaskSpec.of(M)
    _check_inner(A, X)
    _check_mask(M, (A.nrows, X.ncols))
    _require_annihilating(sr, "masked_spgemm")
    if strategy is None:
        avg_row = A.nnz / A.nrows if A.nrows else 0.0
        strategy = "dot" if M.pattern.nnz * avg_row < _estimated_flops(A, X) else "filter"
    if strategy == "dot":
        Y, flops = _masked_dot(A, X, M, sr)
    elif strategy == "filter":
        Y, flops = _masked_filter(A, X, M, sr)
    else:
        raise ValueError(f"unknown masked_spgemm strategy {strategy!r}")
    if with_stats:
        return Y, SpgemmStats(flops, Y.nnz)
    return Y


def _masked_dot(A, X, M, sr):
    add, mul = sr.add, sr.mul
    aptr, acol, aval = A.lists()
    XT = transpose(X)
    tptr, tcol, tval = XT.lists()
    mptr, mcol, _ = M.pattern.lists()
    rows = []
    flops = 0
    for i in range(A.nrows):
        acc = {}
        alo, ahi = aptr[i], aptr[i + 1]
        if alo < ahi:
            for t in range(mptr[i], mptr[i + 1]):
                j = mcol[t]
                p, q, qe = alo, tptr[j], tptr[j + 1]
                found = False
                s = None
                while p < ahi and q < qe:
                    ka, kx = acol[p], tcol[q]
                    if ka == kx:
                        v = mul(aval[p], tval[q])
                        flops += 1
                        s = add(s, v) if found else v
                        found = True
                        p += 1
                        q += 1
                    elif ka < kx:
                        p += 1
                    else:
                        q += 1
                if found:
                    acc[j] = s
        rows.append(acc)
    return from_rows(A.nrows, X.ncols, rows, sr), flops


def _masked_filter(A, X, M, sr):
    add, mul = sr.add, sr.mul
    aptr, acol, aval = A.lists()
    xptr, xcol, xval = X.lists()
    mptr, mcol, _ = M.pattern.lists()
    rows = []
    flops = 0
    for i in range(A.nrows):
        allowed = set(mcol[mptr[i] : mptr[i + 1]])
        acc: dict = {}
        if allowed:
            for p in range(aptr[i], aptr[i + 1]):
                k = acol[p]
                a = aval[p]
                for q in range(xptr[k], xptr[k + 1]):
                    j = xcol[q]
                    flops += 1
                    v = mul(a, xval[q])
                    acc[j] = add(acc[j], v) if j in acc else v
        rows.append({j: v for j, v in acc.items() if j in allowed})
    return from_rows(A.nrows, X.ncols, rows, sr), flops


def _sparse_dense(A: SparseMatrix, X: DenseMatrix, sr: Semiring) -> DenseMatrix:
    _check_inner(A, X)
    add, mul = sr.add, sr.mul
    aptr, acol, aval = A.lists()
    xrows = X.values.tolist()
    n = X.ncols
    out = []
    for i in range(A.nrows):
        lo, hi = aptr[i], aptr[i + 1]
        if lo == hi:
            out.append([sr.add_identity] * n)
            continue
        a, xk = aval[lo], xrows[acol[lo]]
        acc = [mul(a, xk[j]) for j in range(n)]
        for p in range(lo + 1, hi):
            a, xk = aval[p], xrows[acol[p]]
            for j in range(n):
                acc[j] = add(acc[j], mul(a, xk[j]))
        out.append(acc)
    return dense_from_rows(out, A.nrows, n, sr.dtype)


def spmm(A: SparseMatrix, X: DenseMatrix, sr: Semiring) -> DenseMatrix:
    """Sparse times tall-skinny dense.

    Y[i, j] folds ``mul(A[i, k], X[k, j])`` over the stored k of row i only,
    so rows without entries come back filled with ``sr.add_identity``.
    """
    return _sparse_dense(A, X, sr)


def spdm3(A: SparseMatrix, X: DenseMatrix, sr: Semiring) -> DenseMatrix:
    """Sparse times square dense; same contract as :func:`spmm`."""
    return _sparse_dense(A, X, sr)


def sddmm(A: DenseMatrix, X: DenseMatrix, M: "MaskSpec | SparseMatrix", sr: Semiring) -> SparseMatrix:
    """Dense-dense product sampled at the mask's stored positions."""
    M = MaskSpec.of(M)
    _check_inner(A, X)
    _check_mask(M, (A.nrows, X.ncols))
    add, mul = sr.add, sr.mul
    arows = A.values.tolist()
    xcols = X.values.T.tolist()
    inner = A.ncols
    mptr, mcol, _ = M.pattern.lists()
    rows = []
    for i in range(A.nrows):
        ai = arows[i]
        acc = {}
        for t in range(mptr[i], mptr[i + 1]):
            j = mcol[t]
            xj = xcols[j]
            s = sr.add_identity
            if inner:
                s = mul(ai[0], xj[0])
                for k in range(1, inner):
                    s = add(s, mul(ai[k], xj[k]))
            acc[j] = s
        rows.append(acc)
    return from_rows(A.nrows, X.ncols, rows, sr)


def triple_product(R: SparseMatrix, A: SparseMatrix, P: SparseMatrix, sr: Semiring) -> SparseMatrix:
    """Galerkin product R A P, associated as (R A) P."""
    _check_inner(R, A)
    _check_inner(A, P)
    RA, _ = spgemm(R, A, sr)
    C, _ = spgemm(RA, P, sr)
    return C


def gram(A: SparseMatrix, sr: Semiring) -> SparseMatrix:
    """A A^T; non-annihilating semirings go through the union kernel."""
    AT = transpose(A)
    if sr.annihilating:
        return spgemm(A, AT, sr)[0]
    return spgemm_union(A, AT, sr)
