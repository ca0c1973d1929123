"""Probability trees: interchange identities, divergences, and matching.

The package models rooted trees whose leaves carry a probability
distribution, derives node probabilities and branching distributions, and
evaluates the leaf-average/node-sum interchange identity together with its
consequences: expected path length, entropy, informational divergence, and
their per-branch (rate) forms.  A second layer adds variational distance,
Pinsker-style lower bounds on trees, and product-distribution
approximation with a greedy matcher for convergence experiments.

Everything runs in either exact rational arithmetic (identities hold with
==) or 64-bit floats (identities hold to documented tolerances).
"""

from .errors import (
    AlphabetMismatch,
    CycleDetected,
    DegenerateTree,
    DuplicateSiblingLabel,
    FunctionalIncomplete,
    LeafMassMismatch,
    MassNotNormalized,
    MultipleParents,
    MultipleRoots,
    NegativeMass,
    ParamsInvalid,
    ParseError,
    ShapeMismatch,
    TreeProbError,
    UnknownLabel,
)
from .numeric import ExactLog2, parse_rational
from .tree import (
    Tree,
    branching_distributions,
    build_tree,
    node_probabilities,
    path_lengths,
    structurally_equal,
)
from .identities import (
    BranchingNodeDistribution,
    LansitReport,
    branching_node_distribution,
    differential_lansit_check,
    entropy_rate,
    expected_path_length,
    lansit_check,
    leaf_entropy,
    log_ratio_functional,
    merged_increment_sum,
    node_increment_sum,
    normalized_divergence,
    surprisal_functional,
    tree_divergence,
)
from .approximation import (
    BoundedFunctional,
    FiniteDistribution,
    PinskerCheck,
    PinskerTreeReport,
    ProductSpec,
    divergence_to_product,
    entropy_functional,
    entropy_rate_gap,
    functional_convergence_gap,
    pinsker_check,
    product_branch_divergence,
    product_node_probabilities,
    tree_pinsker_report,
    variational_distance,
)
from .generators import (
    GENERATOR_ALGORITHM,
    GeneratorParams,
    SWEEP_CSV_COLUMNS,
    SweepRow,
    convergence_sweep,
    dyadic_quantization,
    generate_random_tree,
    grow_matcher_tree,
    write_sweep_csv,
)
from .treefile import (
    TreeDocument,
    document_to_tree,
    parse_document,
    parse_tree,
    serialize_document,
    serialize_tree,
    tree_to_document,
)
from .cli import Report, main, run_cli

__version__ = "0.1.0"

__all__ = [
    "AlphabetMismatch",
    "BoundedFunctional",
    "BranchingNodeDistribution",
    "CycleDetected",
    "DegenerateTree",
    "DuplicateSiblingLabel",
    "ExactLog2",
    "FiniteDistribution",
    "FunctionalIncomplete",
    "GENERATOR_ALGORITHM",
    "GeneratorParams",
    "LansitReport",
    "LeafMassMismatch",
    "MassNotNormalized",
    "MultipleParents",
    "MultipleRoots",
    "NegativeMass",
    "ParamsInvalid",
    "ParseError",
    "PinskerCheck",
    "PinskerTreeReport",
    "ProductSpec",
    "Report",
    "SWEEP_CSV_COLUMNS",
    "ShapeMismatch",
    "SweepRow",
    "Tree",
    "TreeDocument",
    "TreeProbError",
    "UnknownLabel",
    "branching_distributions",
    "branching_node_distribution",
    "build_tree",
    "convergence_sweep",
    "differential_lansit_check",
    "divergence_to_product",
    "document_to_tree",
    "dyadic_quantization",
    "entropy_functional",
    "entropy_rate",
    "entropy_rate_gap",
    "expected_path_length",
    "functional_convergence_gap",
    "generate_random_tree",
    "grow_matcher_tree",
    "lansit_check",
    "leaf_entropy",
    "log_ratio_functional",
    "main",
    "merged_increment_sum",
    "node_increment_sum",
    "node_probabilities",
    "normalized_divergence",
    "parse_document",
    "parse_rational",
    "parse_tree",
    "path_lengths",
    "pinsker_check",
    "product_branch_divergence",
    "product_node_probabilities",
    "run_cli",
    "serialize_document",
    "serialize_tree",
    "structurally_equal",
    "surprisal_functional",
    "tree_divergence",
    "tree_pinsker_report",
    "tree_to_document",
    "variational_distance",
    "write_sweep_csv",
]
