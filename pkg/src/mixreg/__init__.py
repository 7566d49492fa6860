"""Regularized multiclass linear regression on corrupted Gaussian mixtures.

Training via ridge / l1 / sup-norm regularized least squares, asymptotic
error-sparsity-quantization predictions in the strong-regularization
regime, and the compression experiments connecting the two.
"""

from .compress import boundary_fraction, one_bit, sparsify
from .data import (
    Dataset,
    GmmConfig,
    corrupt_labels,
    generate_dataset,
    load_dataset,
    one_hot,
    sample_means,
    sample_test_points,
    save_dataset,
)
from .evaluate import (
    ErrorEstimate,
    analytic_error,
    conditional_error_mc,
    empirical_error,
    predict,
    predict_batch,
    qk,
    sandwich_check,
)
from .numerics import (
    BivariateRegion,
    RngStream,
    bivariate_gauss_expect,
    nelder_mead_max,
    q_tail,
    solve_spd,
)
from .solvers import (
    RegKind,
    RegularizerSpec,
    SolverReport,
    prox_linf,
    project_l1_ball,
    soft_threshold,
    solve_lasso,
    solve_linf,
    solve_ridge,
    train_all,
)
from .sweep import SweepSpec, SweepRow, default_lambda_grid, emit_csv, run_sweep
from .theory import (
    RidgeClosedForm,
    SaddlePoint,
    StConstants,
    TheoryPrediction,
    lasso_delta,
    lasso_prediction,
    lasso_saddle,
    linf_delta,
    linf_prediction,
    linf_saddle,
    omega_value,
    ridge_closed_form,
    ridge_prediction,
    st_constants,
    xi_value,
)

__version__ = "0.1.0"

__all__ = [
    "BivariateRegion",
    "Dataset",
    "ErrorEstimate",
    "GmmConfig",
    "RegKind",
    "RegularizerSpec",
    "RidgeClosedForm",
    "RngStream",
    "SaddlePoint",
    "SolverReport",
    "StConstants",
    "SweepRow",
    "SweepSpec",
    "TheoryPrediction",
    "analytic_error",
    "bivariate_gauss_expect",
    "boundary_fraction",
    "conditional_error_mc",
    "corrupt_labels",
    "default_lambda_grid",
    "emit_csv",
    "empirical_error",
    "generate_dataset",
    "lasso_delta",
    "lasso_prediction",
    "lasso_saddle",
    "linf_delta",
    "linf_prediction",
    "linf_saddle",
    "load_dataset",
    "nelder_mead_max",
    "omega_value",
    "one_bit",
    "one_hot",
    "predict",
    "predict_batch",
    "project_l1_ball",
    "prox_linf",
    "q_tail",
    "qk",
    "ridge_closed_form",
    "ridge_prediction",
    "run_sweep",
    "sample_means",
    "sample_test_points",
    "sandwich_check",
    "save_dataset",
    "soft_threshold",
    "solve_lasso",
    "solve_linf",
    "solve_ridge",
    "solve_spd",
    "sparsify",
    "st_constants",
    "train_all",
    "xi_value",
]
