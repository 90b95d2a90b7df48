"""Supervised tuning and mixture composition of tabular data synthesizers.

The library builds synthetic tabular data in two optimization stages, both
driven by downstream classification utility: first each synthesizer's
hyperparameters are tuned against validation AUC, then mixture weights over
the whole family are searched so the stacked synthetic dataset maximizes the
same signal.
"""

from .allocation import largest_remainder_allocation
from .cgoat import CgoatResult, MixtureComposer, allocate_rows, compose, run_cgoat, warm_starts
from .data import ColumnSchema, Dataset, Partition, SchemaConfig, concat, load_csv, split
from .errors import ConfigError, DataError, GoatmixError, SingleClassError
from .evaluation import EvalResult, auc, evaluate_synthetic, score_model
from .experiment import ExperimentConfig, ExperimentReport, run_experiment
from .gbdt import GbdtClassifier, GbdtConfig, GbdtModel, Tree, predict_proba, train_classifier
from .preprocess import smote_balance, target_encode
from .sgoat import SgoatResult, SupervisedTuner, evaluate_theta, run_sgoat
from .stats import class_share_report, cs_statistic, ks_statistic, paired_t_test
from .synthesizers import (
    METHODS,
    BaseSynthesizer,
    GaussianCopulaSynthesizer,
    HistogramSynthesizer,
    JointMixtureSynthesizer,
    KdePerturbSynthesizer,
    default_theta,
    make_synthesizer,
    search_space,
)
from .tpe import (
    CategoricalParam,
    IntParam,
    LogUniformParam,
    SearchSpace,
    TPEOptimizer,
    Trial,
    TrialHistory,
    UniformParam,
    normalize_simplex,
    simplex_params,
)

__version__ = "0.1.0"

__all__ = [
    "ColumnSchema", "Dataset", "Partition", "SchemaConfig", "concat", "load_csv", "split",
    "target_encode", "smote_balance",
    "GoatmixError", "ConfigError", "DataError", "SingleClassError",
    "METHODS", "BaseSynthesizer", "GaussianCopulaSynthesizer", "JointMixtureSynthesizer",
    "HistogramSynthesizer", "KdePerturbSynthesizer", "make_synthesizer", "search_space",
    "default_theta",
    "SearchSpace", "TPEOptimizer", "Trial", "TrialHistory", "UniformParam", "LogUniformParam",
    "IntParam", "CategoricalParam", "simplex_params", "normalize_simplex",
    "GbdtConfig", "GbdtModel", "GbdtClassifier", "Tree", "train_classifier", "predict_proba",
    "auc", "EvalResult", "evaluate_synthetic", "score_model",
    "SupervisedTuner", "SgoatResult", "run_sgoat", "evaluate_theta",
    "MixtureComposer", "CgoatResult", "warm_starts", "allocate_rows", "compose", "run_cgoat",
    "largest_remainder_allocation",
    "ks_statistic", "cs_statistic", "paired_t_test", "class_share_report",
    "ExperimentConfig", "ExperimentReport", "run_experiment",
    "__version__",
]
