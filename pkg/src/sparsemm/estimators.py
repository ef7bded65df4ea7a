"""Randomized primitives: sparse JL sketches, exact minhash, Cohen's estimator.

Every routine is a deterministic function of its inputs and ``SketchConfig.seed``.
Repetition p draws from its own child stream of ``numpy.random.SeedSequence(seed)``,
so repetitions are independent and could run in any order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .kernels import spmm
from .matrix import DenseMatrix, DimensionError, SparseMatrix, from_coo, transpose
from .semiring import ARITH_F64, SELECT2ND_MIN

__all__ = [
    "RNG_ALGORITHM",
    "SketchConfig",
    "EstimateReport",
    "gen_sjlt",
    "permutation_matrix",
    "minhash_sketch",
    "estimate_jaccard",
    "cohen_nnz_estimate",
]

RNG_ALGORITHM = "numpy.PCG64/SeedSequence"
COHEN_ESTIMATOR = "exp1-min:(r-1)/sum(min)"


@dataclass(frozen=True)
class SketchConfig:
    r: int = 1
    seed: int = 0
    s: int = 1

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"r must be >= 1, got {self.r}")
        if self.s < 1:
            raise ValueError(f"s must be >= 1, got {self.s}")

    def streams(self, n: int) -> list[np.random.Generator]:
        children = np.random.SeedSequence(self.seed).spawn(n)
        return [np.random.Generator(np.random.PCG64(c)) for c in children]


@dataclass(frozen=True)
class EstimateReport:
    per_column_nnz: np.ndarray
    r: int
    estimator: str = COHEN_ESTIMATOR
    rng: str = RNG_ALGORITHM

    def as_dict(self) -> dict:
        return {
            "per_column_nnz": self.per_column_nnz.tolist(),
            "r": self.r,
            "estimator": self.estimator,
            "rng": self.rng,
        }


def gen_sjlt(d: int, m: int, cfg: SketchConfig) -> SparseMatrix:
    """d x m sparse JL transform with exactly ``cfg.s`` entries per column.

    Nonzeros are Rademacher signs scaled by 1/sqrt(s), so each column has unit
    norm. s = 1 gives a CountSketch.
    """
    if cfg.s > d:
        raise ValueError(f"s={cfg.s} exceeds sketch dimension d={d}")
    if d > m:
        warnings.warn(f"sketch dimension d={d} exceeds input dimension m={m}", stacklevel=2)
    scale = 1.0 / math.sqrt(cfg.s)
    triples = []
    for col, rng in enumerate(cfg.streams(m)):
        rows = rng.choice(d, size=cfg.s, replace=False)
        signs = rng.integers(0, 2, size=cfg.s) * 2 - 1
        triples.extend((int(i), col, float(sg) * scale) for i, sg in zip(rows, signs))
    return from_coo(d, m, triples, ARITH_F64)


def permutation_matrix(n: int, cfg: SketchConfig) -> DenseMatrix:
    """n x r matrix whose column p is a uniform permutation of 0..n-1."""
    cols = [rng.permutation(n) for rng in cfg.streams(cfg.r)]
    arr = np.column_stack(cols).astype(np.float64) if cols else np.empty((n, 0))
    return DenseMatrix.from_array(arr.reshape(n, cfg.r))


def minhash_sketch(A: SparseMatrix, cfg: SketchConfig) -> DenseMatrix:
    """Exact minhash signatures as one SpMM over (select2nd, min).

    signature[i, p] is the smallest image under permutation p of the columns
    stored in row i. Rows with no entries get the sentinel ``A.ncols``; two
    such rows compare as identical.
    """
    S = permutation_matrix(A.ncols, cfg)
    Y = spmm(A, S, SELECT2ND_MIN)
    sig = np.where(np.isinf(Y.values), A.ncols, Y.values).astype(np.int64)
    return DenseMatrix.from_array(sig)


def estimate_jaccard(sig_a, sig_b) -> float:
    a = np.asarray(sig_a)
    b = np.asarray(sig_b)
    if a.shape != b.shape:
        raise DimensionError(f"signature lengths differ: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("empty signatures")
    return float(np.count_nonzero(a == b)) / a.size


def cohen_nnz_estimate(A: SparseMatrix, B: SparseMatrix, cfg: SketchConfig) -> EstimateReport:
    """Estimate the nonzero count of every column of A B.

    Each row of A gets r Exponential(1) keys; keys are pushed through A^T then
    B^T keeping the minimum, so column j ends with the minimum key over all
    rows that reach it. For n reaching rows that minimum is Exponential(n) and
    (r - 1) / sum(minima) is unbiased for n.
    """
    if A.ncols != B.nrows:
        raise DimensionError(
            f"inner dimension mismatch: left is {A.nrows}x{A.ncols}, right is {B.nrows}x{B.ncols}"
        )
    if cfg.r < 2:
        raise ValueError("Cohen's estimator needs r >= 2")
    keys = np.column_stack([rng.exponential(1.0, size=A.nrows) for rng in cfg.streams(cfg.r)])
    K = DenseMatrix.from_array(keys.reshape(A.nrows, cfg.r))
    mid = spmm(transpose(A), K, SELECT2ND_MIN)
    Z = spmm(transpose(B), mid, SELECT2ND_MIN).values
    est = np.zeros(B.ncols)
    for j in range(B.ncols):
        row = Z[j]
        if np.isfinite(row).all():
            est[j] = (cfg.r - 1) / math.fsum(row.tolist())
    return EstimateReport(est, cfg.r)
