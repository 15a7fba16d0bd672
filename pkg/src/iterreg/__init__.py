"""Split Bregman and majorization-minimization solvers for l1-regularized
linear inverse problems, with the regularization parameter of each inner
Tikhonov subproblem selected automatically (GCV, chi-squared degrees-of-freedom
tests, discrepancy principle, or residual whiteness)."""

from iterreg.metrics import IterationTrace, isnr, rc_lambda2, rc_x, relative_error
from iterreg.operators import (
    BlurSpec1D,
    BlurSpec2D,
    Problem,
    add_noise_snr,
    build_derivative_1d_zero_bc,
    build_toeplitz_1d,
    circulant_derivative_eigenvalues,
    gaussian_row,
    whiten,
)
from iterreg.decompositions import Gsvd, Spectral2D, aw_pinv_apply, gsvd, ll_pinv_apply, spectral_2d
from iterreg.inner import InnerSolution, residual_norm, solve_offset_tikhonov
from iterreg.selectors import (
    FixedLambda,
    SelectorConfig,
    SelectorOutcome,
    gcv_value,
    jl_value,
    noncentrality,
    select_chi2_central,
    select_chi2_noncentral,
    select_dp,
    select_gcv,
    select_rwp,
    whiteness,
)
from iterreg.solvers import SolveResult, SolverConfig, make_chi2_reference, mm_solve, sb_solve, shrink

__all__ = [
    "BlurSpec1D",
    "BlurSpec2D",
    "FixedLambda",
    "Gsvd",
    "InnerSolution",
    "IterationTrace",
    "Problem",
    "SelectorConfig",
    "SelectorOutcome",
    "SolveResult",
    "SolverConfig",
    "Spectral2D",
    "add_noise_snr",
    "aw_pinv_apply",
    "build_derivative_1d_zero_bc",
    "build_toeplitz_1d",
    "circulant_derivative_eigenvalues",
    "gaussian_row",
    "gcv_value",
    "gsvd",
    "isnr",
    "jl_value",
    "ll_pinv_apply",
    "make_chi2_reference",
    "mm_solve",
    "noncentrality",
    "rc_lambda2",
    "rc_x",
    "relative_error",
    "residual_norm",
    "sb_solve",
    "select_chi2_central",
    "select_chi2_noncentral",
    "select_dp",
    "select_gcv",
    "select_rwp",
    "shrink",
    "solve_offset_tikhonov",
    "spectral_2d",
    "whiten",
    "whiteness",
]
