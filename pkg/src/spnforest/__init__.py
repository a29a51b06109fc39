"""Tractable density estimation with sum-product networks.

Randomized structure learning, forest-style ensembles with cross-network
residual links, batch EM training, and exact marginal inference on binary
data.
"""

__version__ = "0.1.0"

from .graph import (
    MARG,
    SpnGraph,
    StructureStats,
    ValidityReport,
    collapse_unary,
    merge_graphs,
    structure_stats,
    validate,
)
from .inference import log_likelihood, log_marginal, log_values, prune_to_scope
from .learning import (
    LearnConfig,
    full_factorization,
    g_test_split_features,
    learn_extra_spn,
    sample_mu,
)
from .em import EmConfig, EmTrace, em_fit, em_step, log_derivatives
from .ensembles import (
    EnsembleConfig,
    ResidualLinkRecord,
    build_resspn,
    build_rspf,
    residual_weight,
)
from .diagnostics import (
    brute_force_marginal,
    empirical_pairwise_mi,
    mi_gap,
    model_pairwise_mi,
)
from .data import DatasetBundle, load_binary_csv, load_bundle
from .model_io import load_model, save_model

__all__ = [
    "MARG",
    "SpnGraph",
    "StructureStats",
    "ValidityReport",
    "collapse_unary",
    "merge_graphs",
    "structure_stats",
    "validate",
    "log_likelihood",
    "log_marginal",
    "log_values",
    "prune_to_scope",
    "LearnConfig",
    "full_factorization",
    "g_test_split_features",
    "learn_extra_spn",
    "sample_mu",
    "EmConfig",
    "EmTrace",
    "em_fit",
    "em_step",
    "log_derivatives",
    "EnsembleConfig",
    "ResidualLinkRecord",
    "build_resspn",
    "build_rspf",
    "residual_weight",
    "brute_force_marginal",
    "empirical_pairwise_mi",
    "mi_gap",
    "model_pairwise_mi",
    "DatasetBundle",
    "load_binary_csv",
    "load_bundle",
    "load_model",
    "save_model",
]
