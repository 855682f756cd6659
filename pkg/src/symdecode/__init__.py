"""Unsupervised state-space decoding of bounded 1-D positions from neural
observations, with recursive midline-reflection correction, a six-metric
evaluation suite, distribution/spectral analyses, and a Galton-board
correspondence report.
"""

from .correction import (
    CorrectionLog,
    CorrectionTrace,
    SubspaceNode,
    correct_once,
    correct_recursive,
    encode_bit,
    subspace_for,
)
from .em import (
    INIT_SCHEMES,
    WEIGHT_UPDATE_MODES,
    EMConfig,
    EMResult,
    FilterResult,
    em_fit,
    kalman_filter,
    kalman_smoother,
    update_weights,
)
from .errors import (
    ConfigError,
    CsvFormatError,
    DegenerateInputError,
    EMError,
    FilterError,
    OutOfSubspaceError,
    PipelineStageError,
    SymdecodeError,
    UndefinedMetricError,
)
from .galton import (
    BoardAnalogyReport,
    BoardConfig,
    BoardResult,
    algorithm_board_report,
    binomial_pmf,
    clt_convergence_report,
    simulate_board,
    tv_distance,
)
from .metrics import (
    METRIC_COLUMNS,
    HistogramSpec,
    MetricRow,
    js_score,
    kl_score,
    metric_table,
    pcc,
    r_max,
    r_squared,
    rmse,
    smoothed_pmf,
)
from .pipeline import PipelineConfig, PipelineResult, run_pipeline
from .simulate import (
    TRAJECTORY_KINDS,
    SimConfig,
    SimDataset,
    cell_center_predictions,
    gaussian_error_predictions,
    generate_observations,
    generate_trajectory,
    make_dataset,
    true_params,
)
from .spectra import (
    MomentScreen,
    PdfEstimate,
    PsdEstimate,
    count_modes,
    estimate_pdf,
    estimate_psd,
    gaussian_moment_screen,
    noise_series,
)
from .types import (
    ActiveSpace,
    BitSeries,
    ObservationMatrix,
    PredictionSeries,
    StateSpaceParams,
    TrajectorySeries,
    ValidationReport,
    validate_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "ActiveSpace",
    "BitSeries",
    "BoardAnalogyReport",
    "BoardConfig",
    "BoardResult",
    "ConfigError",
    "CorrectionLog",
    "CorrectionTrace",
    "CsvFormatError",
    "DegenerateInputError",
    "EMConfig",
    "EMError",
    "EMResult",
    "FilterError",
    "FilterResult",
    "HistogramSpec",
    "INIT_SCHEMES",
    "METRIC_COLUMNS",
    "TRAJECTORY_KINDS",
    "WEIGHT_UPDATE_MODES",
    "MetricRow",
    "MomentScreen",
    "ObservationMatrix",
    "OutOfSubspaceError",
    "PdfEstimate",
    "PipelineConfig",
    "PipelineResult",
    "PipelineStageError",
    "PredictionSeries",
    "PsdEstimate",
    "SimConfig",
    "SimDataset",
    "StateSpaceParams",
    "SubspaceNode",
    "SymdecodeError",
    "TrajectorySeries",
    "UndefinedMetricError",
    "ValidationReport",
    "algorithm_board_report",
    "binomial_pmf",
    "cell_center_predictions",
    "clt_convergence_report",
    "correct_once",
    "correct_recursive",
    "count_modes",
    "em_fit",
    "encode_bit",
    "estimate_pdf",
    "estimate_psd",
    "gaussian_error_predictions",
    "gaussian_moment_screen",
    "generate_observations",
    "generate_trajectory",
    "js_score",
    "kalman_filter",
    "kalman_smoother",
    "kl_score",
    "make_dataset",
    "metric_table",
    "noise_series",
    "pcc",
    "r_max",
    "r_squared",
    "rmse",
    "run_pipeline",
    "simulate_board",
    "smoothed_pmf",
    "subspace_for",
    "true_params",
    "tv_distance",
    "update_weights",
    "validate_dataset",
]
