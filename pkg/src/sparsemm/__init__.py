"""Semiring-generic sparse matrix multiplication and the graph, sketching and
attention algorithms built on it."""

from .attention import AttentionMask, gen_static_mask, sparse_attention, sparse_softmax
from .estimators import (
    EstimateReport,
    SketchConfig,
    cohen_nnz_estimate,
    estimate_jaccard,
    gen_sjlt,
    minhash_sketch,
)
from .graphs import (
    ApspDistances,
    ClusterAssignment,
    FrontierBatch,
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
from .kernels import (
    SpgemmStats,
    gram,
    masked_spgemm,
    sddmm,
    spdm3,
    spgemm,
    spgemm_union,
    spmm,
    triple_product,
)
from .matrix import (
    DenseMatrix,
    DimensionError,
    MaskSpec,
    SparseMatrix,
    elementwise_combine,
    from_coo,
    from_dense,
    identity,
    prune,
    transpose,
)
from .mmio import gen_erdos_renyi, gen_random_sparse, read_matrix_market, write_matrix_market
from .semiring import REGISTRY, Semiring, get_semiring

__version__ = "0.1.0"
