"""Incomplete-data classification with masked partial similarities,
centroid-augmented three-side kernels, and kernel ridge regression."""

__version__ = "0.1.0"

from ._backend import backend_name
from .centroids import ClassCentroid, centroid_augment, class_centroid, fit_class_centroids
from .dataset import Dataset, SplitSpec, load_csv, load_feature_csv, split
from .errors import (
    BiasDegeneracyError,
    ComparisonError,
    ConfigError,
    DegenerateSplitError,
    DegenerateTargetError,
    EmptyClassError,
    LabelCardinalityError,
    MaskedKrrError,
    ParameterError,
    ParseError,
    PhaseMisuseError,
    ShapeError,
    SolverError,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    compare,
    run_experiment,
    train_model,
    write_cells_csv,
    write_csv,
    write_report,
)
from .kernels import (
    GramMatrix,
    KernelSpec,
    cosine,
    gram,
    gram_datasets,
    masked_poly,
    masked_rbf,
    mpc,
    mpp,
    mpt_linear,
    mpt_poly,
    mpt_rbf,
)
from .krr import (
    EmpiricalModel,
    IntrinsicModel,
    classify,
    fit_empirical,
    fit_intrinsic,
    intrinsic_feature_map,
    left_feature_rows,
    load_model,
    predict,
    predict_scores,
    right_feature_rows,
    save_model,
)
from .masking import MaskedVector, MissingSpec, double_mask, inject_missing, to_masked
from .stats import (
    FdrReport,
    PartialMoments,
    RunningMoments,
    incremental_mean,
    incremental_moments,
    partial_fdr,
    partial_moments,
    select_top_k,
    stream_moments,
)
