"""Graph algorithms phrased as sparse matrix products.

Everything here is built from the kernels in :mod:`sparsemm.kernels` plus
structural helpers; no algorithm walks adjacency lists directly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .kernels import masked_spgemm, spdm3, sddmm, spgemm, triple_product
from .matrix import (
    DenseMatrix,
    DimensionError,
    SparseMatrix,
    apply,
    elementwise_combine,
    from_coo,
    from_rows,
    identity,
    prune,
    transpose,
)
from .semiring import ARITH_F64, ARITH_I64, BOOLEAN, MIN_PLUS, Semiring

__all__ = [
    "ConvergenceWarning",
    "Graph",
    "FrontierBatch",
    "ClusterAssignment",
    "ApspDistances",
    "graph_contract",
    "triangle_matrix",
    "triangle_count",
    "msbfs",
    "bc_batch",
    "mcl_cluster",
    "simrank",
    "sline_expansion",
    "sample_layer_submatrix",
    "apsp",
]


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Graph:
    adjacency: SparseMatrix
    weighted: bool = False
    directed: bool = False

    def __post_init__(self):
        A = self.adjacency
        if A.nrows != A.ncols:
            raise DimensionError(f"adjacency must be square, got {A.nrows}x{A.ncols}")
        if not self.directed and transpose(A) != A:
            raise ValueError("undirected graph needs a symmetric adjacency matrix")

    @classmethod
    def from_edges(
        cls, n: int, edges, *, directed: bool = False, weighted: bool = False
    ) -> "Graph":
        """Edges are (u, v) or (u, v, w); undirected edges are mirrored."""
        triples = []
        for e in edges:
            u, v = e[0], e[1]
            w = float(e[2]) if len(e) > 2 else 1.0
            triples.append((u, v, w))
            if not directed and u != v:
                triples.append((v, u, w))
        A = from_coo(n, n, triples, _FIRST)
        return cls(A, weighted=weighted, directed=directed)

    @property
    def n(self) -> int:
        return self.adjacency.nrows

    def edges(self) -> list[tuple[int, int, float]]:
        return list(self.adjacency.triples())

    def pattern(self, sr: Semiring) -> SparseMatrix:
        """Adjacency with every stored value replaced by ``sr.mul_identity``."""
        return apply(self.adjacency, lambda _: sr.mul_identity, sr)


# duplicate edges keep the first weight seen
_FIRST = Semiring("first-f64", "float", lambda a, b: a, lambda a, b: a * b, 0.0, 1.0)


@dataclass(frozen=True)
class FrontierBatch:
    F: SparseMatrix
    level: int


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray
    num_clusters: int
    iterations: int = 0
    # max |column sum - 1| after each inflate/renormalize step
    stochastic_error: tuple[float, ...] = field(default=(), repr=False)

    def clusters(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.num_clusters)]
        for v, c in enumerate(self.labels.tolist()):
            out[c].append(v)
        return out


@dataclass(frozen=True)
class ApspDistances:
    D: DenseMatrix
    infinity: float = math.inf


def _mask_out(A: SparseMatrix, V: SparseMatrix, sr: Semiring) -> SparseMatrix:
    """Entries of A at positions NOT stored in V."""
    rows = []
    for i in range(A.nrows):
        seen = set(V.row(i)[0])
        cs, vs = A.row(i)
        rows.append({j: v for j, v in zip(cs, vs) if j not in seen})
    return from_rows(A.nrows, A.ncols, rows, sr)


def _column_sums(M: SparseMatrix) -> list[float]:
    sums = [0.0] * M.ncols
    for _, j, v in M.triples():
        sums[j] += v
    return sums


def _scale_columns(M: SparseMatrix, factors: Sequence[float], sr: Semiring) -> SparseMatrix:
    rows = []
    for i in range(M.nrows):
        cs, vs = M.row(i)
        rows.append({j: v * factors[j] for j, v in zip(cs, vs)})
    return from_rows(M.nrows, M.ncols, rows, sr)


def _max_abs_diff(A: SparseMatrix, B: SparseMatrix) -> float:
    D = elementwise_combine(A, B, lambda a, b: a - b, True, ARITH_F64)
    return max((abs(v) for v in D.values.tolist()), default=0.0)


# -- contraction ------------------------------------------------------------


def graph_contract(
    A_F: SparseMatrix,
    partition: Sequence[int],
    sr: Semiring = ARITH_F64,
    num_clusters: Optional[int] = None,
) -> SparseMatrix:
    """Collapse vertices into clusters: P^T A_F P with P[v, partition[v]] = 1."""
    n = A_F.nrows
    if A_F.ncols != n:
        raise DimensionError(f"adjacency must be square, got {A_F.nrows}x{A_F.ncols}")
    if len(partition) != n:
        raise ValueError(f"partition has {len(partition)} labels for {n} vertices")
    k = num_clusters if num_clusters is not None else (max(partition) + 1 if n else 0)
    for v, c in enumerate(partition):
        if not 0 <= c < k:
            raise ValueError(f"vertex {v} has cluster label {c} outside [0, {k})")
    P = from_coo(n, k, ((v, int(c), sr.mul_identity) for v, c in enumerate(partition)), sr)
    return triple_product(transpose(P), A_F, P, sr)


# -- triangles --------------------------------------------------------------


def _lower(G: Graph) -> SparseMatrix:
    if G.directed:
        raise ValueError("triangle counting needs an undirected graph")
    triples = []
    for i, j, _ in G.adjacency.triples():
        if i == j:
            raise ValueError(f"self-loop at vertex {i}")
        if j < i:
            triples.append((i, j, 1))
    return from_coo(G.n, G.n, triples, ARITH_I64)


def triangle_matrix(G: Graph) -> SparseMatrix:
    """T = L^2 o L: T[i, j] counts triangles closing the edge i > j."""
    L = _lower(G)
    return masked_spgemm(L, L, L, ARITH_I64)


def triangle_count(G: Graph) -> int:
    return int(sum(triangle_matrix(G).values.tolist()))


# -- BFS and betweenness ----------------------------------------------------


def _sources_matrix(n: int, sources: Sequence[int], sr: Semiring) -> SparseMatrix:
    if not len(sources):
        raise ValueError("need at least one source vertex")
    if len(set(sources)) != len(sources):
        raise ValueError("source vertices must be distinct")
    for s in sources:
        if not 0 <= s < n:
            raise ValueError(f"source {s} out of range for {n} vertices")
    return from_coo(n, len(sources), ((s, c, sr.mul_identity) for c, s in enumerate(sources)), sr)


def _frontiers(AT: SparseMatrix, F0: SparseMatrix, sr: Semiring) -> Iterator[FrontierBatch]:
    """Level-synchronous multi-source BFS: F_{i+1} = A^T F_i minus visited."""
    F, visited, level = F0, F0, 0
    while F.nnz:
        yield FrontierBatch(F, level)
        nxt, _ = spgemm(AT, F, sr)
        F = _mask_out(nxt, visited, sr)
        visited = elementwise_combine(visited, F, sr.add, True, sr)
        level += 1


def msbfs(G: Graph, sources: Sequence[int]) -> DenseMatrix:
    """BFS levels from each source at once; column c is source c, -1 = unreached."""
    F0 = _sources_matrix(G.n, sources, BOOLEAN)
    AT = transpose(G.pattern(BOOLEAN))
    levels = np.full((G.n, len(sources)), -1, dtype=np.int64)
    for batch in _frontiers(AT, F0, BOOLEAN):
        for v, c, _ in batch.F.triples():
            levels[v, c] = batch.level
    return DenseMatrix.from_array(levels)


def bc_batch(G: Graph, sources: Optional[Sequence[int]] = None) -> np.ndarray:
    """Betweenness contributions from a batch of sources (all by default).

    Forward: one multi-source BFS over (+, x) integers whose frontier values
    are shortest-path counts. Backward: per level, dependencies flow from
    level d to d-1 through a masked SpGEMM with the adjacency. Pairs are
    ordered, so on undirected graphs each path is counted in both directions.
    """
    if G.weighted:
        raise ValueError("betweenness is only supported for unweighted graphs")
    if sources is None:
        sources = range(G.n)
    sources = list(sources)
    F0 = _sources_matrix(G.n, sources, ARITH_I64)
    A_int = G.pattern(ARITH_I64)
    levels = [b.F for b in _frontiers(transpose(A_int), F0, ARITH_I64)]
    A = G.pattern(ARITH_F64)
    sigma = [apply(F, float, ARITH_F64) for F in levels]
    delta = from_coo(G.n, len(sources), (), ARITH_F64)
    for d in range(len(levels) - 1, 1, -1):
        ones = apply(sigma[d], lambda _: 1.0, ARITH_F64)
        numer = elementwise_combine(ones, delta, lambda a, b: a + b, True, ARITH_F64)
        W = elementwise_combine(numer, sigma[d], lambda a, b: a / b, False, ARITH_F64)
        T = masked_spgemm(A, W, sigma[d - 1], ARITH_F64)
        contrib = elementwise_combine(T, sigma[d - 1], lambda t, s: t * s, False, ARITH_F64)
        delta = elementwise_combine(delta, contrib, lambda a, b: a + b, True, ARITH_F64)
    bc = np.zeros(G.n)
    for v, _, x in delta.triples():
        bc[v] += x
    return bc


# -- Markov clustering ------------------------------------------------------


def _column_normalize(M: SparseMatrix) -> SparseMatrix:
    sums = _column_sums(M)
    return _scale_columns(M, [1.0 / s if s else 0.0 for s in sums], ARITH_F64)


def _stochastic_error(M: SparseMatrix) -> float:
    return max((abs(s - 1.0) for s in _column_sums(M)), default=0.0)


def mcl_cluster(
    G: Graph,
    inflation: float = 2.0,
    prune_threshold: float = 1e-4,
    max_iters: int = 100,
    tol: float = 1e-6,
) -> ClusterAssignment:
    """Markov clustering: expand (square), prune, inflate, repeat.

    Self-loops weighted by each vertex's largest edge weight are added first.
    Each column is assigned to the row holding its largest mass (lowest index
    on ties); clusters are the connected components of that assignment.
    """
    if inflation <= 1:
        raise ValueError(f"inflation must exceed 1, got {inflation}")
    A = G.adjacency
    n = G.n
    if any(v < 0 for v in A.values.tolist()):
        raise ValueError("MCL needs nonnegative edge weights")
    loops = []
    for i in range(n):
        _, vs = A.row(i)
        loops.append((i, i, max(vs, default=1.0)))
    M = elementwise_combine(A, from_coo(n, n, loops, ARITH_F64), max, True, ARITH_F64)
    M = _column_normalize(M)
    history = []
    it = 0
    for it in range(1, max_iters + 1):
        E, _ = spgemm(M, M, ARITH_F64)
        E = prune(E, ARITH_F64, threshold=prune_threshold)
        nxt = _column_normalize(apply(E, lambda v: v**inflation, ARITH_F64))
        history.append(_stochastic_error(nxt))
        change = _max_abs_diff(nxt, M)
        M = nxt
        if change < tol:
            break
    labels, k = _attractor_components(M)
    return ClusterAssignment(labels, k, it, tuple(history))


def _attractor_components(M: SparseMatrix) -> tuple[np.ndarray, int]:
    n = M.ncols
    best = [-1.0] * n
    attractor = list(range(n))
    for i, j, v in M.triples():
        if v > best[j]:
            best[j] = v
            attractor[j] = i
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for j in range(n):
        a, b = find(j), find(attractor[j])
        if a != b:
            parent[max(a, b)] = min(a, b)
    ids: dict[int, int] = {}
    labels = np.empty(n, dtype=np.int64)
    for v in range(n):
        labels[v] = ids.setdefault(find(v), len(ids))
    return labels, len(ids)


# -- SimRank ----------------------------------------------------------------


def simrank(
    G: Graph,
    c: float = 0.8,
    tol: float = 1e-4,
    max_iters: int = 50,
    *,
    return_iterations: bool = False,
):
    """Iterate S <- max(c * Ah^T S Ah, I) from S = I.

    Ah is the adjacency with column j scaled by 1 / indegree(j), which folds
    the usual 1/(|In(a)| |In(b)|) factor into the products.
    """
    if not 0 < c < 1:
        raise ValueError(f"damping must lie in (0, 1), got {c}")
    n = G.n
    A = G.pattern(ARITH_F64)
    indeg = [0] * n
    for j in A.col_idx.tolist():
        indeg[j] += 1
    Ah = _scale_columns(A, [1.0 / d if d else 0.0 for d in indeg], ARITH_F64)
    AhT = transpose(Ah)
    I = identity(n, ARITH_F64)
    S = I
    it = 0
    converged = n == 0
    for it in range(1, max_iters + 1):
        T, _ = spgemm(AhT, S, ARITH_F64)
        T, _ = spgemm(T, Ah, ARITH_F64)
        T = apply(T, lambda v: c * v, ARITH_F64)
        nxt = elementwise_combine(T, I, max, True, ARITH_F64)
        change = _max_abs_diff(nxt, S)
        S = nxt
        if change < tol:
            converged = True
            break
    if not converged:
        warnings.warn(f"SimRank did not reach tol={tol} in {max_iters} iterations", ConvergenceWarning, stacklevel=2)
    return (S, it) if return_iterations else S


# -- hypergraph s-line expansion ---------------------------------------------


def sline_expansion(H: SparseMatrix, s: int) -> SparseMatrix:
    """Node graph linking pairs that share at least ``s`` hyperedges.

    Only the strict upper triangle of H H^T is formed, then mirrored.
    """
    if s < 1:
        raise ValueError("s must be at least 1")
    Hc = apply(H, lambda _: 1, ARITH_I64)
    U, _ = spgemm(Hc, transpose(Hc), ARITH_I64, strict_upper=True)
    U = prune(U, ARITH_I64, keep=lambda v: v >= s)
    U = apply(U, lambda _: 1, ARITH_I64)
    return elementwise_combine(U, transpose(U), lambda a, b: a + b, True, ARITH_I64)


# -- GNN layer sampling -----------------------------------------------------


def _selector(picks: Sequence[int], n: int, what: str) -> SparseMatrix:
    for p in picks:
        if not 0 <= p < n:
            raise ValueError(f"{what} index {p} out of range for dimension {n}")
    return from_coo(len(picks), n, ((q, int(p), 1.0) for q, p in enumerate(picks)), ARITH_F64)


def sample_layer_submatrix(
    A: SparseMatrix, rows: Sequence[int], cols: Sequence[int], d: Sequence[float]
) -> SparseMatrix:
    """Sampled propagation block P_l A D P_{l+1}^T.

    Entry (p, q) equals A[rows[p], cols[q]] * d[cols[q]].
    """
    if len(d) != A.ncols:
        raise DimensionError(f"scale vector has length {len(d)}, expected {A.ncols}")
    P_l = _selector(rows, A.nrows, "row")
    P_next = _selector(cols, A.ncols, "column")
    D = from_coo(A.ncols, A.ncols, ((k, k, float(x)) for k, x in enumerate(d)), ARITH_F64)
    PAD = triple_product(P_l, A, D, ARITH_F64)
    out, _ = spgemm(PAD, transpose(P_next), ARITH_F64)
    return out


# -- all-pairs shortest paths -----------------------------------------------


def _apsp_start(G: Graph) -> tuple[np.ndarray, SparseMatrix]:
    n = G.n
    D = np.full((n, n), math.inf)
    off_diag = []
    for i, j, w in G.adjacency.triples():
        if w < 0:
            raise ValueError(f"negative edge weight {w} on ({i}, {j})")
        if i != j:
            D[i, j] = min(D[i, j], w)
            off_diag.append((i, j, float(w)))
    np.fill_diagonal(D, 0.0)
    return D, from_coo(n, n, off_diag, MIN_PLUS)


def apsp(G: Graph, method: str = "tiskin-sparse") -> ApspDistances:
    """Distances over (min, +); unreachable pairs hold ``inf``.

    ``kleene-dense`` squares the full distance matrix ceil(log2(n-1)) times.
    ``tiskin-sparse`` relaxes D <- min(D, E D) where E keeps only pairs whose
    distance strictly improved in the previous round (their shortest paths
    need more hops than the last bound), stopping once E is empty.
    """
    D, E = _apsp_start(G)
    n = G.n
    if method == "kleene-dense":
        full = from_coo(n, n, ((i, j, True) for i in range(n) for j in range(n)), BOOLEAN)
        rounds = math.ceil(math.log2(n - 1)) if n > 2 else 0
        for _ in range(rounds):
            Dm = DenseMatrix.from_array(D)
            D = sddmm(Dm, Dm, full, MIN_PLUS).to_dense(MIN_PLUS).values
    elif method == "tiskin-sparse":
        rounds = math.ceil(math.log2(n)) if n > 1 else 0
        for _ in range(rounds):
            if E.nnz == 0:
                break
            R = spdm3(E, DenseMatrix.from_array(D), MIN_PLUS).values
            nxt = np.minimum(D, R)
            gained = np.argwhere(nxt < D)
            E = from_coo(n, n, ((int(i), int(j), float(nxt[i, j])) for i, j in gained), MIN_PLUS)
            D = nxt
    else:
        raise ValueError(f"unknown APSP method {method!r}")
    return ApspDistances(DenseMatrix.from_array(D))
