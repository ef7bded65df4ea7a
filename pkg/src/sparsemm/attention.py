"""Sparse attention: SDDMM scores, row softmax over stored entries, SpMM."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .kernels import sddmm, spmm
from .matrix import DenseMatrix, DimensionError, MaskSpec, SparseMatrix, apply, from_coo, from_rows
from .semiring import ARITH_F64, BOOLEAN

__all__ = ["AttentionMask", "gen_static_mask", "sparse_softmax", "sparse_attention"]

KINDS = ("full", "sliding-window", "block-local", "custom")


@dataclass(frozen=True)
class AttentionMask:
    pattern: MaskSpec
    kind: str
    params: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.pattern.shape[0]


def gen_static_mask(
    n: int,
    kind: str,
    *,
    window: Optional[int] = None,
    block: Optional[int] = None,
    causal: bool = False,
    pattern: Optional[SparseMatrix] = None,
) -> AttentionMask:
    """Position-based mask over an n-token sequence.

    sliding-window keeps |i - j| <= window, block-local keeps i // block ==
    j // block, custom wraps a caller pattern. ``causal`` drops j > i.
    """
    if n < 1:
        raise ValueError(f"sequence length must be positive, got {n}")
    if kind == "full":
        keep = lambda i, j: True  # noqa: E731
        params = {}
    elif kind == "sliding-window":
        if window is None or window < 1:
            raise ValueError("sliding-window mask needs window >= 1")
        keep = lambda i, j: abs(i - j) <= window  # noqa: E731
        params = {"window": window}
    elif kind == "block-local":
        if block is None or block < 1:
            raise ValueError("block-local mask needs block >= 1")
        keep = lambda i, j: i // block == j // block  # noqa: E731
        params = {"block": block}
    elif kind == "custom":
        if pattern is None or pattern.shape != (n, n):
            raise ValueError(f"custom mask needs an {n}x{n} pattern")
        stored = pattern.pattern()
        keep = lambda i, j: (i, j) in stored  # noqa: E731
        params = {}
    else:
        raise ValueError(f"unknown mask kind {kind!r}; expected one of {', '.join(KINDS)}")
    if causal:
        params["causal"] = True
    triples = (
        (i, j, True) for i in range(n) for j in range(n) if keep(i, j) and not (causal and j > i)
    )
    return AttentionMask(MaskSpec(from_coo(n, n, triples, BOOLEAN)), kind, params)


def sparse_softmax(A: SparseMatrix, support: Optional[MaskSpec] = None) -> SparseMatrix:
    """Row softmax over stored entries only; empty rows stay empty.

    Equivalent to a dense softmax with -inf at unstored positions. An entry
    whose exponential underflows to 0.0 is dropped like any other null.

    With ``support`` the softmax runs over the support's positions instead,
    reading unstored scores as 0.0. Scores that came out of a kernel as an
    exact zero were dropped as nulls but are still real logits.
    """
    rows = []
    for i in range(A.nrows):
        cs, vs = A.row(i)
        if support is not None:
            got = dict(zip(cs, vs))
            cs = support.pattern.row(i)[0]
            vs = [got.get(j, 0.0) for j in cs]
        if not cs:
            rows.append({})
            continue
        mx = max(vs)
        ex = [math.exp(v - mx) for v in vs]
        total = math.fsum(ex)
        rows.append({j: e / total for j, e in zip(cs, ex)})
    return from_rows(A.nrows, A.ncols, rows, ARITH_F64)


def sparse_attention(
    Q: DenseMatrix, K: DenseMatrix, V: DenseMatrix, M: "AttentionMask | MaskSpec"
) -> DenseMatrix:
    """softmax((M o Q K^T) / sqrt(d_k)) V with the mask applied before the product."""
    mask = M.pattern if isinstance(M, AttentionMask) else MaskSpec.of(M)
    if Q.ncols != K.ncols:
        raise DimensionError(f"Q has {Q.ncols} columns but K has {K.ncols}")
    if V.nrows != K.nrows:
        raise DimensionError(f"V has {V.nrows} rows but K has {K.nrows}")
    if mask.shape != (Q.nrows, K.nrows):
        raise DimensionError(f"mask is {mask.shape}, expected {(Q.nrows, K.nrows)}")
    scores = sddmm(Q, K.transpose(), mask, ARITH_F64)
    scale = 1.0 / math.sqrt(Q.ncols)
    B = sparse_softmax(apply(scores, lambda v: v * scale, ARITH_F64), mask)
    return spmm(B, V, ARITH_F64)


def empty_rows(M: "AttentionMask | MaskSpec") -> int:
    mask = M.pattern if isinstance(M, AttentionMask) else M
    p = mask.pattern.row_ptr
    return int(((p[1:] - p[:-1]) == 0).sum())
