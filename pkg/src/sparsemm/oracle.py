"""Brute-force reference implementations.

Nothing in this module calls into ``kernels`` or ``graphs``: every routine
works on plain nested lists so it can be used to check those modules (and
is what the CLI's ``--oracle`` flag runs).
"""

from __future__ import annotations

import math
from collections import deque
from itertools import combinations
from typing import Any, Sequence

from .semiring import Semiring

Dense = list[list[Any]]


def densify(A, sr: Semiring) -> Dense:
    out = [[sr.add_identity] * A.ncols for _ in range(A.nrows)]
    for i, j, v in A.triples():
        out[i][j] = v
    return out


def sparse_dict(D: Dense, sr: Semiring) -> dict[tuple[int, int], Any]:
    """Non-null entries of a dense table keyed by position."""
    return {
        (i, j): v
        for i, row in enumerate(D)
        for j, v in enumerate(row)
        if not sr.is_null(v)
    }


def as_dict(A) -> dict[tuple[int, int], Any]:
    return {(i, j): v for i, j, v in A.triples()}


def matmul(A: Dense, X: Dense, sr: Semiring, inner: int, skip_null_left: bool = False) -> Dense:
    """Triple-loop product over ``sr``, k ascending.

    ``skip_null_left`` gives stored-entries-only semantics for the left
    operand (what spmm means for non-annihilating semirings).
    """
    m = len(A)
    n = len(X[0]) if X else 0
    out = [[sr.add_identity] * n for _ in range(m)]
    for i in range(m):
        Ai = A[i]
        for j in range(n):
            acc = sr.add_identity
            for k in range(inner):
                a = Ai[k]
                if skip_null_left and sr.is_null(a):
                    continue
                acc = sr.add(acc, sr.mul(a, X[k][j]))
            out[i][j] = acc
    return out


def transpose(D: Dense, ncols: int) -> Dense:
    return [[D[i][j] for i in range(len(D))] for j in range(ncols)]


def softmax_masked(scores: Dense, mask: set[tuple[int, int]]) -> Dense:
    """Row softmax with -inf outside ``mask``; fully masked rows become 0."""
    out = []
    for i, row in enumerate(scores):
        keep = [j for j in range(len(row)) if (i, j) in mask]
        r = [0.0] * len(row)
        if keep:
            mx = max(row[j] for j in keep)
            ex = {j: math.exp(row[j] - mx) for j in keep}
            total = math.fsum(ex.values())
            for j in keep:
                r[j] = ex[j] / total
        out.append(r)
    return out


def attention(Q: Dense, K: Dense, V: Dense, mask: set[tuple[int, int]]) -> Dense:
    n, dk = len(Q), len(Q[0])
    scale = 1.0 / math.sqrt(dk)
    scores = [
        [math.fsum(Q[i][t] * K[j][t] for t in range(dk)) * scale for j in range(len(K))]
        for i in range(n)
    ]
    P = softmax_masked(scores, mask)
    dv = len(V[0])
    return [[math.fsum(P[i][j] * V[j][c] for j in range(len(K))) for c in range(dv)] for i in range(n)]


# -- graphs -----------------------------------------------------------------


def adjacency_lists(n: int, edges) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j, _ in edges:
        adj[i].append(j)
    return adj


def bfs_levels(adj: list[list[int]], source: int) -> list[int]:
    level = [-1] * len(adj)
    level[source] = 0
    q = deque([source])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if level[v] < 0:
                level[v] = level[u] + 1
                q.append(v)
    return level


def brandes(adj: list[list[int]], sources: Sequence[int] | None = None) -> list[float]:
    """Queue-based Brandes over ordered pairs; endpoints excluded."""
    n = len(adj)
    bc = [0.0] * n
    for s in range(n) if sources is None else sources:
        for v, d in enumerate(brandes_dependency(adj, s)):
            if v != s:
                bc[v] += d
    return bc


def brandes_dependency(adj: list[list[int]], s: int) -> list[float]:
    n = len(adj)
    sigma = [0] * n
    dist = [-1] * n
    preds: list[list[int]] = [[] for _ in range(n)]
    sigma[s], dist[s] = 1, 0
    order = []
    q = deque([s])
    while q:
        v = q.popleft()
        order.append(v)
        for w in adj[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                q.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)
    delta = [0.0] * n
    for w in reversed(order):
        for v in preds[w]:
            delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
    delta[s] = 0.0
    return delta


def triangles(n: int, edges) -> int:
    nbr = [set() for _ in range(n)]
    for i, j, _ in edges:
        if i != j:
            nbr[i].add(j)
            nbr[j].add(i)
    return sum(
        1 for a, b, c in combinations(range(n), 3) if b in nbr[a] and c in nbr[a] and c in nbr[b]
    )


def floyd_warshall(n: int, edges) -> Dense:
    D = [[math.inf] * n for _ in range(n)]
    for i in range(n):
        D[i][i] = 0.0
    for i, j, w in edges:
        if i != j and w < D[i][j]:
            D[i][j] = float(w)
    for k in range(n):
        Dk = D[k]
        for i in range(n):
            dik = D[i][k]
            if dik == math.inf:
                continue
            Di = D[i]
            for j in range(n):
                if dik + Dk[j] < Di[j]:
                    Di[j] = dik + Dk[j]
    return D


def simrank(n: int, edges, c: float, iters: int) -> Dense:
    """Textbook SimRank: S(a,b) = c/(|I(a)||I(b)|) * sum S(I_i(a), I_j(b))."""
    inn: list[list[int]] = [[] for _ in range(n)]
    for i, j, _ in edges:
        inn[j].append(i)
    S = [[1.0 if a == b else 0.0 for b in range(n)] for a in range(n)]
    for _ in range(iters):
        new = [[0.0] * n for _ in range(n)]
        for a in range(n):
            for b in range(n):
                if a == b:
                    new[a][b] = 1.0
                elif inn[a] and inn[b]:
                    tot = sum(S[u][w] for u in inn[a] for w in inn[b])
                    new[a][b] = c * tot / (len(inn[a]) * len(inn[b]))
        S = new
    return S


def jaccard(a: set, b: set) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def column_nnz_of_product(A, B) -> list[int]:
    """Exact column counts of the boolean product A*B via reachability sets."""
    rows_of_col: list[set[int]] = [set() for _ in range(A.ncols)]
    for i, k, _ in A.triples():
        rows_of_col[k].add(i)
    reach: list[set[int]] = [set() for _ in range(B.ncols)]
    for k, j, _ in B.triples():
        reach[j] |= rows_of_col[k]
    return [len(s) for s in reach]
