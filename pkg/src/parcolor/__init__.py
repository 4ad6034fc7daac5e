"""Parallel graph vertex coloring: speculative greedy, Jones-Plassmann and multi-hash.

Kernels are numba-compiled; set ``PARCOLOR_BACKEND=numpy`` to run the pure
numpy fallback instead.
"""

from ._backend import get_backend, set_backend, using
from .graph import (
    CsrGraph,
    DegreeStats,
    EdgeList,
    GraphInputError,
    MatrixMarketError,
    RmatParams,
    build_csr,
    canonicalize,
    degree_stats,
    generate_rmat,
    load_csr_binary,
    load_graph,
    parse_matrix_market,
    read_matrix_market,
    rmat_graph,
    save_csr_binary,
    write_matrix_market,
)
from .greedy import color_sequential, first_fit_bitset, first_fit_mask
from .harness import (
    RunReport,
    Violation,
    count_colors,
    emit_report,
    run_benchmark,
    verify_coloring,
)
from .independent_set import MultiHashConfig, jp_color, multihash_color
from .speculative import (
    Balance,
    ConvergenceTrace,
    NonConvergenceError,
    Policy,
    SpecConfig,
    color_data_driven,
    color_topology_driven,
    compact_worklist,
    conflict_scan,
    resolve_loser,
)

__version__ = "0.1.0"
