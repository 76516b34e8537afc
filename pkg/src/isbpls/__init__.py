"""Sparse Bridge PLS, offline and incremental, with simulation and index-tracking tools."""
from .errors import *  # noqa: F401,F403
from .linalg import canonicalize_signs, gram_schmidt_orth, sym_eigen_topR
from .offline import HyperParams, SparseModel, build_H, fit_sbpls, predict
from .online import ISBPLS, OnlineState, StepOutput, compute_output, covariance_update, init_state, sim_sparse_step, step
from .sparse import ThresholdResult, gamma_for_count, selection_count_residual, soft_threshold, sparsify_iterative
from .montecarlo import MCConfig, aggregate, lambda_sweep, percent_correct, run_experiment, run_replicate
from .tracking import backtest_ispls, random_portfolio_baseline, synthetic_market
# bound last so the name refers to the function rather than the submodule
from .simulate import RegimeSchedule, SimOutput, simulate

__version__ = "0.1.0"
