"""Protein stability estimation from structure-conditioned sequence likelihoods.

The package turns tables of ln p(sequence | structure) into dimensionless
stability changes for point mutations, evaluates whole strategy matrices
against experimental datasets, and ships an exactly solvable 2-D lattice
system in which every estimator can be checked against brute-force truth.
"""

from .alphabet import CANONICAL, HP, Alphabet, AminoAcid, named_alphabet
from .datasets import (
    DatasetRecord,
    ExperimentalDataset,
    load_experimental_dataset,
    save_experimental_dataset,
)
from .errors import (
    ConfigError,
    DataError,
    DatasetError,
    EvaluationError,
    LatticeError,
    ModelError,
    OracleCheckError,
    StabkitError,
    TableError,
    VariantError,
)
from .estimators import (
    EnsembleScore,
    EstimatorResult,
    ddg_folded_only,
    ddg_full,
    ddg_hybrid,
    ddg_sequence_only,
    ensemble_score,
    log_mean_ratio,
    per_sample_log_ratio,
    pseudo_dG,
    rank_transform,
    stability_from_pF,
)
from .evaluate import (
    STRATEGIES,
    BootstrapResult,
    EvaluationReport,
    ReportRow,
    RunConfig,
    SkippedEntry,
    StrategyRun,
    bootstrap_sem,
    pearson,
    run_strategy_matrix,
    spearman,
)
from .freqmodel import (
    CandidateMarginal,
    FrequencyModel,
    SequenceRatioModel,
    load_amino_acid_counts,
    load_candidate_marginal,
    save_candidate_marginal,
)
from .lattice import (
    Conformation,
    InteractionMatrix,
    LatticeSystem,
    SamplingPlan,
    SequenceFamily,
    emit_oracle_tables,
    energy,
    enumerate_conformations,
    exact_ddg,
    exact_posterior,
    exact_stability,
    folded_proposal_bias,
    occupancy_folded,
    partition_functions,
    sample_conditional,
)
from .scenario import OracleScenario, run_scenario
from .tables import (
    LikelihoodTable,
    load_likelihood_table,
    load_log_weights,
    save_likelihood_table,
    save_log_weights,
)
from .unfolded import (
    FragmentSpec,
    IdpFrequencyModel,
    default_idp_model,
    unfolded_log_ratio_fragment,
    unfolded_log_ratio_idp,
    unfolded_log_ratio_mc,
)
from .variants import Mutation, Sequence, VariantSpec, apply_mutations, parse_variant

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "AminoAcid",
    "BootstrapResult",
    "CANONICAL",
    "CandidateMarginal",
    "ConfigError",
    "Conformation",
    "DataError",
    "DatasetError",
    "DatasetRecord",
    "EnsembleScore",
    "EstimatorResult",
    "EvaluationError",
    "EvaluationReport",
    "ExperimentalDataset",
    "FragmentSpec",
    "FrequencyModel",
    "HP",
    "IdpFrequencyModel",
    "InteractionMatrix",
    "LatticeError",
    "LatticeSystem",
    "LikelihoodTable",
    "ModelError",
    "Mutation",
    "OracleCheckError",
    "OracleScenario",
    "ReportRow",
    "RunConfig",
    "STRATEGIES",
    "SamplingPlan",
    "Sequence",
    "SequenceFamily",
    "SequenceRatioModel",
    "SkippedEntry",
    "StabkitError",
    "StrategyRun",
    "TableError",
    "VariantError",
    "VariantSpec",
    "apply_mutations",
    "bootstrap_sem",
    "ddg_folded_only",
    "ddg_full",
    "ddg_hybrid",
    "ddg_sequence_only",
    "default_idp_model",
    "emit_oracle_tables",
    "energy",
    "ensemble_score",
    "enumerate_conformations",
    "exact_ddg",
    "exact_posterior",
    "exact_stability",
    "folded_proposal_bias",
    "load_amino_acid_counts",
    "load_candidate_marginal",
    "load_experimental_dataset",
    "load_likelihood_table",
    "load_log_weights",
    "log_mean_ratio",
    "named_alphabet",
    "occupancy_folded",
    "parse_variant",
    "partition_functions",
    "pearson",
    "per_sample_log_ratio",
    "pseudo_dG",
    "rank_transform",
    "run_scenario",
    "run_strategy_matrix",
    "sample_conditional",
    "save_candidate_marginal",
    "save_experimental_dataset",
    "save_likelihood_table",
    "save_log_weights",
    "spearman",
    "stability_from_pF",
    "unfolded_log_ratio_fragment",
    "unfolded_log_ratio_idp",
    "unfolded_log_ratio_mc",
]
