"""Command-line harness.

Every subcommand prints one JSON report to stdout and writes result matrices
only when ``--out`` is given. Exit codes: 0 success, 1 usage error, 2 data
error (bad file, dimension mismatch), 3 ``--oracle`` disagreement.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import time
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import oracle
from .attention import empty_rows, gen_static_mask, sparse_attention
from .estimators import (
    RNG_ALGORITHM,
    SketchConfig,
    cohen_nnz_estimate,
    estimate_jaccard,
    gen_sjlt,
    minhash_sketch,
    permutation_matrix,
)
from .graphs import (
    Graph,
    apsp,
    bc_batch,
    graph_contract,
    mcl_cluster,
    msbfs,
    sample_layer_submatrix,
    simrank,
    sline_expansion,
    triangle_count,
)
from .kernels import gram, masked_spgemm, sddmm, spdm3, spgemm, spgemm_union, spmm
from .matrix import DenseMatrix, SparseMatrix
from .mmio import (
    MatrixMarketError,
    default_semiring,
    gen_erdos_renyi,
    gen_random_sparse,
    load,
    peek_header,
    read_matrix_market,
    save,
    write_matrix_market,
)
from .semiring import ARITH_F64, ARITH_I64, BOOLEAN, REGISTRY, Semiring, get_semiring

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_ORACLE = 0, 1, 2, 3

FLOAT_RTOL = 1e-12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


class Run:
    """Mutable accumulator for one invocation's report."""

    def __init__(self, args):
        self.args = args
        self.inputs: list[dict] = []
        self.stats: dict[str, Any] = {}
        self.semiring: Optional[str] = None
        self.seed: Optional[int] = None
        self.oracle_ok: Optional[bool] = None

    def load(self, path: str, sr: Optional[Semiring] = None) -> SparseMatrix:
        A = load(path, sr)
        self.inputs.append({"file": path, "shape": list(A.shape), "nnz": A.nnz})
        return A

    def check(self, ok: bool, **detail) -> None:
        self.oracle_ok = bool(ok) and self.oracle_ok is not False
        self.stats.setdefault("oracle", {}).update(detail, agree=self.oracle_ok)

    def write(self, M) -> None:
        if self.args.out:
            save(M, self.args.out)
            self.stats["output_file"] = self.args.out


# -- helpers ----------------------------------------------------------------


def _semiring(run: Run, path: Optional[str] = None, default: Optional[Semiring] = None) -> Semiring:
    if run.args.semiring:
        sr = get_semiring(run.args.semiring)
    elif path is not None:
        sr = default_semiring(peek_header(path))
    else:
        sr = default or ARITH_F64
    run.semiring = sr.name
    return sr


def _int_list(text: Optional[str]) -> Optional[list[int]]:
    if text is None:
        return None
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _close(a, b, rtol: float) -> bool:
    if a == b:
        return True
    if isinstance(a, float) or isinstance(b, float):
        return abs(a - b) <= rtol * max(abs(a), abs(b))
    return False


def _dense_agree(got: Sequence[Sequence], want: Sequence[Sequence], rtol: float) -> bool:
    return all(_close(g, w, rtol) for gr, wr in zip(got, want) for g, w in zip(gr, wr)) and len(got) == len(want)


def _sparse_agree(Y: SparseMatrix, want: dict, rtol: float) -> bool:
    got = oracle.as_dict(Y)
    return got.keys() == want.keys() and all(_close(got[k], want[k], rtol) for k in got)


def _graph(run: Run, path: str) -> Graph:
    A = run.load(path, ARITH_F64)
    weighted = peek_header(path).field != "pattern" and any(v != 1.0 for v in A.values.tolist())
    return Graph(A, weighted=weighted, directed=run.args.directed)


def _spgemm_stats(run: Run, stats) -> None:
    run.stats.update(stats.as_dict())


# -- subcommands ------------------------------------------------------------


def cmd_spgemm(run: Run) -> None:
    a, b = run.args.inputs
    sr = _semiring(run, a)
    A, X = run.load(a, sr), run.load(b, sr)
    if sr.annihilating:
        Y, st = spgemm(A, X, sr)
        _spgemm_stats(run, st)
        run.stats["kernel"] = "gustavson"
    else:
        Y = spgemm_union(A, X, sr)
        run.stats.update(kernel="union", output_nnz=Y.nnz)
    run.stats["shape"] = list(Y.shape)
    if run.args.oracle:
        want = oracle.matmul(oracle.densify(A, sr), oracle.densify(X, sr), sr, A.ncols)
        run.check(_sparse_agree(Y, oracle.sparse_dict(want, sr), FLOAT_RTOL))
    run.write(Y)


def cmd_masked_spgemm(run: Run) -> None:
    a, b = run.args.inputs
    sr = _semiring(run, a)
    A, X = run.load(a, sr), run.load(b, sr)
    M = run.load(run.args.mask, BOOLEAN)
    Y, st = masked_spgemm(A, X, M, sr, run.args.strategy, with_stats=True)
    _spgemm_stats(run, st)
    run.stats["shape"] = list(Y.shape)
    if run.args.oracle:
        full = oracle.sparse_dict(oracle.matmul(oracle.densify(A, sr), oracle.densify(X, sr), sr, A.ncols), sr)
        keep = M.pattern()
        run.check(_sparse_agree(Y, {k: v for k, v in full.items() if k in keep}, FLOAT_RTOL))
    run.write(Y)


def _sparse_dense_cmd(run: Run, kernel) -> None:
    a, x = run.args.inputs
    sr = _semiring(run, a)
    A = run.load(a, sr)
    X = run.load(x, sr).to_dense(sr)
    Y = kernel(A, X, sr)
    run.stats.update(shape=list(Y.shape), flops=A.nnz * X.ncols)
    if run.args.oracle:
        want = oracle.matmul(oracle.densify(A, sr), X.tolist(), sr, A.ncols, skip_null_left=True)
        run.check(_dense_agree(Y.tolist(), want, FLOAT_RTOL))
    run.write(Y)


def cmd_spmm(run: Run) -> None:
    _sparse_dense_cmd(run, spmm)


def cmd_spdm3(run: Run) -> None:
    _sparse_dense_cmd(run, spdm3)


def cmd_sddmm(run: Run) -> None:
    a, x = run.args.inputs
    sr = _semiring(run, a)
    A = run.load(a, sr).to_dense(sr)
    X = run.load(x, sr).to_dense(sr)
    M = run.load(run.args.mask, BOOLEAN)
    Y = sddmm(A, X, M, sr)
    run.stats.update(shape=list(Y.shape), output_nnz=Y.nnz, mask_nnz=M.nnz)
    if run.args.oracle:
        full = oracle.sparse_dict(oracle.matmul(A.tolist(), X.tolist(), sr, A.ncols), sr)
        keep = M.pattern()
        run.check(_sparse_agree(Y, {k: v for k, v in full.items() if k in keep}, FLOAT_RTOL))
    run.write(Y)


def cmd_gram(run: Run) -> None:
    (a,) = run.args.inputs
    sr = _semiring(run, a)
    A = run.load(a, sr)
    Y = gram(A, sr)
    run.stats.update(shape=list(Y.shape), output_nnz=Y.nnz, kernel="gustavson" if sr.annihilating else "union")
    if run.args.oracle:
        D = oracle.densify(A, sr)
        want = oracle.matmul(D, oracle.transpose(D, A.ncols), sr, A.ncols)
        run.check(_sparse_agree(Y, oracle.sparse_dict(want, sr), FLOAT_RTOL))
    run.write(Y)


def cmd_tricount(run: Run) -> None:
    G = _graph(run, run.args.inputs[0])
    t = triangle_count(G)
    run.stats["triangles"] = t
    if run.args.oracle:
        want = oracle.triangles(G.n, G.edges())
        run.check(t == want, expected=want)


def cmd_msbfs(run: Run) -> None:
    G = _graph(run, run.args.inputs[0])
    sources = _int_list(run.args.sources) or [0]
    L = msbfs(G, sources)
    run.stats.update(sources=sources, max_level=int(L.values.max()) if L.values.size else -1,
                     reached=int((L.values >= 0).sum()))
    if run.args.oracle:
        adj = oracle.adjacency_lists(G.n, G.edges())
        ok = all(oracle.bfs_levels(adj, s) == L.values[:, c].tolist() for c, s in enumerate(sources))
        run.check(ok)
    run.write(L)


def cmd_bc(run: Run) -> None:
    G = _graph(run, run.args.inputs[0])
    G = Graph(G.adjacency, weighted=False, directed=G.directed)
    sources = _int_list(run.args.sources)
    bc = bc_batch(G, sources)
    run.stats["bc"] = bc.tolist()
    if run.args.oracle:
        want = oracle.brandes(oracle.adjacency_lists(G.n, G.edges()), sources)
        run.check(bool(np.allclose(bc, want, rtol=1e-9, atol=1e-9)))


def cmd_mcl(run: Run) -> None:
    G = _graph(run, run.args.inputs[0])
    a = run.args
    res = mcl_cluster(G, a.inflation, a.prune_threshold, a.max_iters)
    run.stats.update(num_clusters=res.num_clusters, labels=res.labels.tolist(), iterations=res.iterations)
    if a.oracle:
        worst = max(res.stochastic_error, default=0.0)
        run.check(worst <= 1e-9, max_column_sum_error=worst)


def cmd_simrank(run: Run) -> None:
    path = run.args.inputs[0]
    A = run.load(path, ARITH_F64)
    G = Graph(A, directed=True)
    a = run.args
    S, iters = simrank(G, a.damping, a.tol, a.max_iters, return_iterations=True)
    run.stats.update(iterations=iters, output_nnz=S.nnz)
    if a.oracle:
        want = oracle.simrank(G.n, G.edges(), a.damping, iters)
        got = oracle.densify(S, ARITH_F64)
        worst = max((abs(g - w) for gr, wr in zip(got, want) for g, w in zip(gr, wr)), default=0.0)
        run.check(worst <= 1e-9, max_abs_error=worst)
    run.write(S)


def cmd_sline(run: Run) -> None:
    H = run.load(run.args.inputs[0], ARITH_I64)
    s = run.args.s
    Gs = sline_expansion(H, s)
    run.stats.update(edges=Gs.nnz // 2, s=s)
    if run.args.oracle:
        sets = [set(H.row(i)[0]) for i in range(H.nrows)]
        want = {(i, j) for i in range(H.nrows) for j in range(H.nrows) if i != j and len(sets[i] & sets[j]) >= s}
        run.check(Gs.pattern() == want)
    run.write(Gs)


def cmd_contract(run: Run) -> None:
    path = run.args.inputs[0]
    sr = _semiring(run, path)
    A = run.load(path, sr)
    part = _int_list(run.args.partition)
    C = graph_contract(A, part, sr)
    run.stats.update(shape=list(C.shape), output_nnz=C.nnz)
    if run.args.oracle:
        want: dict = {}
        for i, j, v in A.triples():
            key = (part[i], part[j])
            want[key] = sr.add(want[key], v) if key in want else v
        want = {k: v for k, v in want.items() if not sr.is_null(v)}
        run.check(_sparse_agree(C, want, 1e-9))
    run.write(C)


def cmd_sample_layer(run: Run) -> None:
    A = run.load(run.args.inputs[0], ARITH_F64)
    rows, cols = _int_list(run.args.rows), _int_list(run.args.cols)
    d = _float_list(run.args.scale) if run.args.scale else [1.0] * A.ncols
    S = sample_layer_submatrix(A, rows, cols, d)
    run.stats.update(shape=list(S.shape), output_nnz=S.nnz)
    if run.args.oracle:
        want = {}
        for p, r in enumerate(rows):
            for q, c in enumerate(cols):
                v = A.get(r, c, 0.0) * d[c]
                if v != 0.0:
                    want[(p, q)] = v
        run.check(_sparse_agree(S, want, FLOAT_RTOL))
    run.write(S)


def cmd_apsp(run: Run) -> None:
    path = run.args.inputs[0]
    G = Graph(run.load(path, ARITH_F64), weighted=True, directed=True)
    res = apsp(G, run.args.method)
    Dv = res.D.values
    run.stats.update(method=run.args.method, unreachable=int(np.isinf(Dv).sum()),
                     max_finite=float(Dv[np.isfinite(Dv)].max()) if np.isfinite(Dv).any() else None)
    if run.args.oracle:
        want = oracle.floyd_warshall(G.n, G.edges())
        run.check(Dv.tolist() == want)
    run.write(res.D)


def cmd_attention(run: Run) -> None:
    a = run.args
    run.seed = a.seed
    run.semiring = ARITH_F64.name
    rng = np.random.default_rng(a.seed)
    n, dk = a.n, a.dk
    Q = DenseMatrix.from_array(rng.uniform(-1, 1, (n, dk)))
    K = DenseMatrix.from_array(rng.uniform(-1, 1, (n, dk)))
    V = DenseMatrix.from_array(rng.uniform(-1, 1, (n, dk)))
    M = gen_static_mask(n, a.kind, window=a.window, block=a.block, causal=a.causal)
    out = sparse_attention(Q, K, V, M)
    run.stats.update(n=n, dk=dk, mask_kind=a.kind, mask_nnz=M.pattern.pattern.nnz,
                     empty_mask_rows=empty_rows(M), checksum=math.fsum(out.values.ravel().tolist()))
    if a.oracle:
        want = oracle.attention(Q.tolist(), K.tolist(), V.tolist(), M.pattern.pattern.pattern())
        worst = max((abs(g - w) for gr, wr in zip(out.tolist(), want) for g, w in zip(gr, wr)), default=0.0)
        run.check(worst <= 1e-10, max_abs_error=worst)
    run.write(out)


def cmd_minhash(run: Run) -> None:
    A = run.load(run.args.inputs[0], BOOLEAN)
    cfg = SketchConfig(r=run.args.r, seed=run.args.seed)
    run.seed = cfg.seed
    run.semiring = "select2nd-min"
    sig = minhash_sketch(A, cfg)
    run.stats.update(r=cfg.r, rng=RNG_ALGORITHM, shape=list(sig.shape),
                     empty_rows=int(sum(1 for i in range(A.nrows) if not A.row(i)[0])))
    if A.nrows >= 2:
        run.stats["jaccard_row0_row1"] = estimate_jaccard(sig.values[0], sig.values[1])
    if run.args.oracle:
        P = permutation_matrix(A.ncols, cfg).values.astype(np.int64)
        ok = True
        for i in range(A.nrows):
            cols = A.row(i)[0]
            for p in range(cfg.r):
                want = min((int(P[j, p]) for j in cols), default=A.ncols)
                ok &= want == int(sig.values[i, p])
        run.check(ok)
    run.write(sig)


def cmd_nnz_estimate(run: Run) -> None:
    a, b = run.args.inputs
    A, B = run.load(a, BOOLEAN), run.load(b, BOOLEAN)
    cfg = SketchConfig(r=run.args.r, seed=run.args.seed)
    run.seed = cfg.seed
    run.semiring = "select2nd-min"
    rep = cohen_nnz_estimate(A, B, cfg)
    run.stats.update(rep.as_dict())
    if run.args.oracle:
        exact = oracle.column_nnz_of_product(A, B)
        est = rep.per_column_nnz.tolist()
        rel = [abs(e - x) / x for e, x in zip(est, exact) if x > 0]
        big = [abs(e - x) / x <= 0.15 for e, x in zip(est, exact) if x >= 16]
        zeros_ok = all(e == 0 for e, x in zip(est, exact) if x == 0)
        frac = sum(big) / len(big) if big else 1.0
        run.check(zeros_ok and frac >= 0.9, exact=exact, max_relative_error=max(rel, default=0.0),
                  fraction_within_15pct=frac)


def cmd_sjlt(run: Run) -> None:
    a = run.args
    cfg = SketchConfig(r=1, seed=a.seed, s=a.s)
    run.seed = cfg.seed
    run.semiring = ARITH_F64.name
    S = gen_sjlt(a.d, a.m, cfg)
    run.stats.update(shape=[a.d, a.m], nnz=S.nnz, s=a.s, rng=RNG_ALGORITHM)
    if a.oracle:
        counts = np.bincount(S.col_idx, minlength=a.m)
        mag = 1.0 / math.sqrt(a.s)
        run.check(bool((counts == a.s).all()) and all(abs(v) == mag for v in S.values.tolist()))
    run.write(S)


def cmd_gen(run: Run) -> None:
    a = run.args
    run.seed = a.seed
    if a.kind == "er":
        G = gen_erdos_renyi(a.n, a.density, a.weighted, a.seed, a.directed)
        M = G.adjacency
        run.semiring = ARITH_F64.name
    else:
        sr = _semiring(run)
        M = gen_random_sparse(a.n, a.cols or a.n, a.density, a.seed, sr)
    run.stats.update(shape=list(M.shape), nnz=M.nnz)
    if a.oracle:
        run.check(_roundtrip_ok(M))
    run.write(M)


def cmd_convert(run: Run) -> None:
    src = run.args.inputs[0]
    sr = _semiring(run, src)
    M = run.load(src, sr)
    run.stats.update(shape=list(M.shape), nnz=M.nnz)
    if run.args.oracle:
        run.check(_roundtrip_ok(M))
    run.write(M)


def _roundtrip_ok(M: SparseMatrix) -> bool:
    buf = io.BytesIO()
    write_matrix_market(M, buf)
    buf.seek(0)
    sr = {"b": BOOLEAN, "i": ARITH_I64, "u": ARITH_I64}.get(M.values.dtype.kind, ARITH_F64)
    return read_matrix_market(buf, sr) == M


# -- parser -----------------------------------------------------------------

Handler = Callable[[Run], None]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--semiring", choices=sorted(REGISTRY), help="semiring label")
    common.add_argument("--out", help="write the result matrix here (Matrix Market)")
    common.add_argument("--oracle", action="store_true", help="cross-check against a brute-force oracle")
    common.add_argument("--seed", type=int, default=0, help="RNG seed for randomized commands")
    common.add_argument("--directed", action="store_true", help="treat graph input as directed")

    p = _Parser(prog="sparsemm", description="Semiring sparse matrix multiplication harness")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, fn: Handler, n_inputs: int, help: str):
        sp = sub.add_parser(name, parents=[common], help=help)
        if n_inputs:
            sp.add_argument("inputs", nargs=n_inputs, metavar="MTX")
        sp.set_defaults(handler=fn)
        return sp

    add("spgemm", cmd_spgemm, 2, "sparse x sparse")
    sp = add("masked-spgemm", cmd_masked_spgemm, 2, "sparse x sparse under a mask")
    sp.add_argument("--mask", required=True)
    sp.add_argument("--strategy", choices=["dot", "filter"])
    add("spmm", cmd_spmm, 2, "sparse x tall-skinny dense")
    sp = add("sddmm", cmd_sddmm, 2, "dense x dense sampled at a mask")
    sp.add_argument("--mask", required=True)
    add("spdm3", cmd_spdm3, 2, "sparse x square dense")
    add("gram", cmd_gram, 1, "A A^T")
    add("tricount", cmd_tricount, 1, "triangle count")
    sp = add("msbfs", cmd_msbfs, 1, "multi-source BFS levels")
    sp.add_argument("--sources", help="comma-separated source vertices (default 0)")
    sp = add("bc", cmd_bc, 1, "betweenness centrality from a batch of sources")
    sp.add_argument("--sources", help="comma-separated source vertices (default all)")
    sp = add("mcl", cmd_mcl, 1, "Markov clustering")
    sp.add_argument("--inflation", type=float, default=2.0)
    sp.add_argument("--prune-threshold", type=float, default=1e-4)
    sp.add_argument("--max-iters", type=int, default=100)
    sp = add("simrank", cmd_simrank, 1, "SimRank similarity")
    sp.add_argument("--damping", type=float, default=0.8)
    sp.add_argument("--tol", type=float, default=1e-4)
    sp.add_argument("--max-iters", type=int, default=50)
    sp = add("sline", cmd_sline, 1, "hypergraph s-line expansion")
    sp.add_argument("--s", type=int, default=1)
    sp = add("contract", cmd_contract, 1, "graph contraction P^T A P")
    sp.add_argument("--partition", required=True, help="comma-separated cluster label per vertex")
    sp = add("sample-layer", cmd_sample_layer, 1, "sampled GNN layer submatrix")
    sp.add_argument("--rows", required=True)
    sp.add_argument("--cols", required=True)
    sp.add_argument("--scale", help="comma-separated diagonal scale, one per column of A")
    sp = add("apsp", cmd_apsp, 1, "all-pairs shortest paths over (min, +)")
    sp.add_argument("--method", choices=["kleene-dense", "tiskin-sparse"], default="tiskin-sparse")
    sp = add("attention", cmd_attention, 0, "sparse attention on seeded random Q, K, V")
    sp.add_argument("--n", type=int, default=16)
    sp.add_argument("--dk", type=int, default=8)
    sp.add_argument("--kind", choices=["full", "sliding-window", "block-local"], default="sliding-window")
    sp.add_argument("--window", type=int, default=2)
    sp.add_argument("--block", type=int, default=4)
    sp.add_argument("--causal", action="store_true")
    sp = add("minhash", cmd_minhash, 1, "exact minhash signatures")
    sp.add_argument("--r", type=int, default=128)
    sp = add("nnz-estimate", cmd_nnz_estimate, 2, "Cohen column-nnz estimate of A B")
    sp.add_argument("--r", type=int, default=256)
    sp = add("sjlt", cmd_sjlt, 0, "sparse Johnson-Lindenstrauss sketch")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--s", type=int, default=1)
    sp = add("gen", cmd_gen, 0, "random graph or matrix")
    sp.add_argument("--kind", choices=["er", "random"], default="er")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--cols", type=int)
    sp.add_argument("--density", type=float, default=0.1)
    sp.add_argument("--weighted", action="store_true")
    add("convert", cmd_convert, 1, "read any supported Matrix Market file, write general coordinate")
    return p


def run(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    r = Run(args)
    start = time.perf_counter()
    try:
        args.handler(r)
    except UsageError as e:
        sys.stderr.write(f"sparsemm {args.command}: {e}\n")
        return EXIT_USAGE
    except (MatrixMarketError, ValueError, IndexError, TypeError, OSError) as e:
        sys.stderr.write(f"sparsemm {args.command}: {e}\n")
        return EXIT_DATA
    report = {
        "subcommand": args.command,
        "inputs": r.inputs,
        "semiring": r.semiring,
        "seed": r.seed,
        "stats": r.stats,
        "wall_time": time.perf_counter() - start,
    }
    stdout.write(json.dumps(report, indent=2, sort_keys=True, default=_jsonable) + "\n")
    if r.oracle_ok is False:
        return EXIT_ORACLE
    return EXIT_OK


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
