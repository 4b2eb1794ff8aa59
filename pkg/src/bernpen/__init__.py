"""Sparse estimation with completely monotone concave penalties.

The package provides exact scalar thresholding operators for a
one-parameter family of concave penalties, a pathwise coordinate-descent
solver for penalized least squares, a proximal alternating solver for
logistic and robust losses, simulation scenarios with selection metrics,
and a batch command-line interface.
"""

from .cd_solver import (
    CDConfig,
    CDState,
    COMPUTE_CASE2,
    DEFAULT_ALPHAS,
    LocalMinReport,
    PAPER_FAITHFUL,
    PathGrid,
    PathSolution,
    cd_sweep,
    check_local_min,
    check_standardized,
    convexity_gate,
    fit_path,
    kkt_residual,
)
from .data_metrics import (
    BackTransform,
    CVResult,
    Dataset,
    SCENARIOS,
    STUDY_PENALTIES,
    SimScenario,
    StudyRow,
    accuracy,
    cv_select,
    data1,
    data2,
    data3,
    fse,
    load_table,
    run_study,
    simulate,
    spe,
    standardize,
    write_metadata,
)
from .errors import (
    BernpenError,
    ContractViolationError,
    DataFormatError,
    DomainError,
    InvalidParameterError,
    NoRootError,
    NumericalError,
)
from .losses import (
    HUBER,
    LOGISTIC,
    SQUARED,
    coord_curvature_bound,
    curvature_bounds,
    loss_grad,
    loss_value,
    partial_residual_inner,
)
from .palm_solver import (
    CURVATURE_BOUND,
    FIXED_STEP,
    DescentReport,
    PalmConfig,
    SolverTrace,
    fit_palm,
    palm_coordinate_step,
    verify_descent,
)
from .penalty import (
    NAMED_RHO,
    PenaltySpec,
    emit_curve,
    eta_normalizer,
    has_atomic_levy_measure,
    lambda_from_eta,
    levy_atom,
    levy_density,
    max_concavity,
    mcp_value,
    penalty_value,
    phi,
    phi_double_prime,
    phi_prime,
    scaled_penalty,
)
from .thresholding import (
    ThresholdQuery,
    ThresholdResult,
    kappa_kep,
    kappa_lfr,
    kappa_log,
    mcp_threshold,
    oracle_minimize,
    prox,
    soft_threshold,
    threshold,
    threshold_from_eta,
    threshold_value,
)

__version__ = "0.1.0"

__all__ = [
    "BackTransform",
    "BernpenError",
    "CDConfig",
    "CDState",
    "COMPUTE_CASE2",
    "ContractViolationError",
    "CURVATURE_BOUND",
    "CVResult",
    "DEFAULT_ALPHAS",
    "DataFormatError",
    "Dataset",
    "DescentReport",
    "DomainError",
    "FIXED_STEP",
    "HUBER",
    "InvalidParameterError",
    "LOGISTIC",
    "LocalMinReport",
    "NAMED_RHO",
    "NoRootError",
    "NumericalError",
    "PalmConfig",
    "PAPER_FAITHFUL",
    "PathGrid",
    "PathSolution",
    "PenaltySpec",
    "SCENARIOS",
    "SQUARED",
    "STUDY_PENALTIES",
    "SimScenario",
    "SolverTrace",
    "StudyRow",
    "ThresholdQuery",
    "ThresholdResult",
    "accuracy",
    "cd_sweep",
    "check_local_min",
    "check_standardized",
    "convexity_gate",
    "coord_curvature_bound",
    "curvature_bounds",
    "cv_select",
    "data1",
    "data2",
    "data3",
    "emit_curve",
    "eta_normalizer",
    "fit_palm",
    "fit_path",
    "fse",
    "has_atomic_levy_measure",
    "kappa_kep",
    "kappa_lfr",
    "kappa_log",
    "kkt_residual",
    "lambda_from_eta",
    "levy_atom",
    "levy_density",
    "load_table",
    "loss_grad",
    "loss_value",
    "max_concavity",
    "mcp_threshold",
    "mcp_value",
    "oracle_minimize",
    "palm_coordinate_step",
    "partial_residual_inner",
    "penalty_value",
    "phi",
    "phi_double_prime",
    "phi_prime",
    "prox",
    "run_study",
    "scaled_penalty",
    "simulate",
    "soft_threshold",
    "spe",
    "standardize",
    "threshold",
    "threshold_from_eta",
    "threshold_value",
    "verify_descent",
    "write_metadata",
]
