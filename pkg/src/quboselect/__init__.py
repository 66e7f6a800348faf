"""QUBO feature selection for survey data.

Builds mutual-information selection matrices, minimizes them with a
seeded classical annealer across every subset size, ranks features by
appearance counts, and validates the ranking against a linear baseline
with boosted-tree trials and Welch tests.
"""

from .boosting import BoostedTreesClassifier, BoostedTreesRegressor
from .dataset import (
    BinaryTarget,
    Dataset,
    RawTable,
    TargetSpec,
    binarize_target,
    build_dataset,
    compose_sum_target,
    drop_missing_columns,
    load_table,
    write_table,
)
from .evaluation import (
    ComparisonReport,
    EvalProtocol,
    GbtConfig,
    balanced_accuracy,
    gbt_train,
    negative_mae,
    run_protocol,
    welch_ttest,
)
from .infotheory import (
    DiscreteColumn,
    JointHistogram,
    conditional_mutual_information,
    discretize,
    entropy,
    mutual_information,
)
from .qubo import (
    IsingModel,
    QuboBuildMode,
    QuboMatrix,
    apply_cardinality,
    build_feature_qubo,
    energy,
    ising_to_qubo,
)
from .ranking import (
    FeatureRanking,
    LinearCoefficientRanker,
    QuboFeatureRanker,
    SweepConfig,
    mlr_rank,
    ols_fit,
    qa_rank,
    rank_delta,
)
from .rng import derive_seed, generator
from .solver import AnnealConfig, Sample, SampleSet, SolverError, anneal, select_k_features, solve_exact
from .synth import GroundTruth, SynthSpec, generate, redundant_preset, survey_preset

__version__ = "0.1.0"

__all__ = [
    "AnnealConfig",
    "BinaryTarget",
    "BoostedTreesClassifier",
    "BoostedTreesRegressor",
    "ComparisonReport",
    "Dataset",
    "DiscreteColumn",
    "EvalProtocol",
    "FeatureRanking",
    "GbtConfig",
    "GroundTruth",
    "IsingModel",
    "JointHistogram",
    "LinearCoefficientRanker",
    "QuboBuildMode",
    "QuboFeatureRanker",
    "QuboMatrix",
    "RawTable",
    "Sample",
    "SampleSet",
    "SolverError",
    "SweepConfig",
    "SynthSpec",
    "TargetSpec",
    "anneal",
    "apply_cardinality",
    "balanced_accuracy",
    "binarize_target",
    "build_dataset",
    "build_feature_qubo",
    "compose_sum_target",
    "conditional_mutual_information",
    "derive_seed",
    "discretize",
    "drop_missing_columns",
    "energy",
    "entropy",
    "gbt_train",
    "generate",
    "generator",
    "ising_to_qubo",
    "load_table",
    "mlr_rank",
    "mutual_information",
    "negative_mae",
    "ols_fit",
    "qa_rank",
    "rank_delta",
    "redundant_preset",
    "run_protocol",
    "select_k_features",
    "solve_exact",
    "survey_preset",
    "welch_ttest",
    "write_table",
]
