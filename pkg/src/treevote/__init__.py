"""Decision-tree ensemble toolkit for worker-evaluation pipelines.

Chi-square feature screening, CART and CHAID-family tree learners,
boosting, random forests, bootstrap bagging with a heterogeneous
voting committee, an evaluation suite (confusion matrices, error
rates, ROC and gain curves), and a deterministic CSV-to-report-bundle
pipeline with a CLI.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .chisquare import (
    ChiSquareReport,
    ContingencyTable,
    FeatureStat,
    bin_index,
    chi_square_pvalue,
    chi_square_stat,
    contingency,
    equal_frequency_cuts,
    select_features,
)
from .data import Column, Dataset, Schema, load_csv, write_csv
from .ensembles import (
    BoostParams,
    EnsembleModel,
    ForestParams,
    bag,
    committee,
    default_mtry,
    model_dist,
    model_predict,
    train_boosted,
    train_random_forest,
    vote,
)
from .errors import (
    AucUndefinedError,
    ConfigError,
    DataLoadError,
    DegenerateDataError,
    DegenerateTableError,
    OutputWriteError,
    SchemaMismatchError,
    TreevoteError,
)
from .figures import GAIN, ROC, curves_png, render_svg
from .metrics import (
    ConfusionMatrix,
    EvalSummary,
    GainCurve,
    RocCurve,
    accuracy,
    confusion,
    curve_csv,
    error_rate,
    frequency_csv,
    frequency_report,
    gain,
    roc_auc,
    std_error,
)
from .numformat import format_fixed, format_number, percent_str, round_half_up
from .pipeline import (
    ModelSpec,
    PipelineConfig,
    ReportBundle,
    load_config,
    parse_config,
    run_pipeline,
)
from .rng import SeededRng, derive_seed, random_integer
from .sampling import BootstrapSample, bootstrap, stratified_split
from .serialize import (
    model_from_yaml,
    model_to_yaml,
    schema_from_yaml,
    schema_to_yaml,
)
from .synth import CLASSES, evaluation_label, generate_workers, worker_schema
from .trees import (
    CART,
    CHAID,
    EXHAUSTIVE_CHAID,
    DecisionTree,
    SplitRule,
    TreeNode,
    TreeParams,
    bonferroni_nominal,
    bonferroni_ordinal,
    gini,
    predict,
    predict_dist,
    train_cart,
    train_chaid,
    train_exhaustive_chaid,
)

__all__ = [
    "__version__",
    "AucUndefinedError",
    "BoostParams",
    "BootstrapSample",
    "CART",
    "CHAID",
    "CLASSES",
    "ChiSquareReport",
    "Column",
    "ConfigError",
    "ConfusionMatrix",
    "ContingencyTable",
    "DataLoadError",
    "Dataset",
    "DecisionTree",
    "DegenerateDataError",
    "DegenerateTableError",
    "EXHAUSTIVE_CHAID",
    "EnsembleModel",
    "EvalSummary",
    "FeatureStat",
    "ForestParams",
    "GAIN",
    "GainCurve",
    "ModelSpec",
    "OutputWriteError",
    "PipelineConfig",
    "ROC",
    "ReportBundle",
    "RocCurve",
    "Schema",
    "SchemaMismatchError",
    "SeededRng",
    "SplitRule",
    "TreeNode",
    "TreeParams",
    "TreevoteError",
    "accuracy",
    "bag",
    "bin_index",
    "bonferroni_nominal",
    "bonferroni_ordinal",
    "bootstrap",
    "chi_square_pvalue",
    "chi_square_stat",
    "committee",
    "confusion",
    "contingency",
    "curve_csv",
    "curves_png",
    "default_mtry",
    "derive_seed",
    "equal_frequency_cuts",
    "error_rate",
    "evaluation_label",
    "format_fixed",
    "format_number",
    "frequency_csv",
    "frequency_report",
    "gain",
    "generate_workers",
    "gini",
    "load_config",
    "load_csv",
    "model_dist",
    "model_from_yaml",
    "model_predict",
    "model_to_yaml",
    "parse_config",
    "percent_str",
    "predict",
    "predict_dist",
    "random_integer",
    "roc_auc",
    "round_half_up",
    "run_pipeline",
    "schema_from_yaml",
    "schema_to_yaml",
    "select_features",
    "std_error",
    "stratified_split",
    "train_boosted",
    "train_cart",
    "train_chaid",
    "train_exhaustive_chaid",
    "train_random_forest",
    "vote",
    "worker_schema",
    "write_csv",
]
