"""Inhomogeneous, arc-assigned and cell-cell interaction random digraphs."""

__version__ = "0.1.0"

from .core import (
    ArcCountTable,
    Kernel,
    StabilityReport,
    TypeDistribution,
    TypedDigraph,
    TypedMultiDigraph,
    check_kernel_bound,
    classify_stability,
    kappa_to_lambda,
    stable_count_bound,
    validate_distribution,
)
from .generators import (
    PairPool,
    assign_types,
    generate_ard,
    generate_ird,
    generate_ird_fast,
    make_chung_lu_kernel,
    make_gilbert_kernel,
    make_sbm_kernel,
    sample_pairs_without_replacement,
)
from .cci import CCIInputs, cci_kernel, compute_acceptance, generate_cci, simplify
from .analysis import (
    arc_type_counts,
    check_irreducibility,
    giant_alpha,
    solve_survival,
    tarjan_scc,
)
