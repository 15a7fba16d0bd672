"""Outer iterations for l1/TV-regularized least squares: split Bregman and
majorization-minimization, both reduced at each step to an offset Tikhonov
subproblem whose regularization parameter is re-selected every iteration
(or held fixed, or frozen once its relative change stalls)."""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from iterreg.decompositions import Gsvd, aw_pinv_apply, ll_pinv_apply
from iterreg.inner import solve_offset_tikhonov
from iterreg.metrics import IterationTrace, isnr, rc_lambda2, rc_x, relative_error
from iterreg.selectors import (
    FixedLambda,
    SelectorConfig,
    select_chi2_central,
    select_chi2_noncentral,
    select_dp,
    select_gcv,
    select_rwp,
)


@dataclass
class SolverConfig:
    """tau (shrinkage threshold, sb) and epsilon (majorizer width, mm) stay
    fixed across iterations; None picks the per-path default at solve time:
    0.005 / 0.0003 on the dense 1-D path, 0.01 / 0.01 on the 2-D path."""

    method: str = "sb"  # sb | mm
    tau: float | None = None
    epsilon: float | None = None
    selector: object = field(default_factory=SelectorConfig)
    tol_x: float = 0.001
    tol_lambda: float | None = 0.01  # None disables freezing
    max_iter: int = 500
    x_init_policy: str = "data"  # data | zero

    def __post_init__(self):
        if self.method not in ("sb", "mm"):
            raise ValueError(f"unknown method: {self.method}")
        if self.x_init_policy not in ("data", "zero"):
            raise ValueError(f"unknown init policy: {self.x_init_policy}")
        if self.tau is not None and not self.tau > 0.0:
            raise ValueError("tau must be positive")
        if self.epsilon is not None and not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class SolveResult:
    x: np.ndarray
    trace: list
    converged: bool
    freeze_iter: int | None


def shrink(v, threshold):
    """Soft-thresholding, the proximal map of the l1 norm."""
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - threshold, 0.0)


def make_chi2_reference(decomp, h):
    """Reference pair for the dof tests at offset h: the minimum-norm
    solution x0 of L x = h in the A-weighted sense, and the projection of
    h onto the range of L (which equals L x0)."""
    x0 = aw_pinv_apply(decomp, h)
    h_proj = ll_pinv_apply(decomp, h)
    return x0, h_proj


def _select_lambda(decomp, b, h, xbar, selector):
    """Dispatch one lambda selection; returns (lam, objective)."""
    if isinstance(selector, FixedLambda):
        return selector.lam, math.nan
    kind = selector.kind
    if kind == "gcv":
        out = select_gcv(decomp, b, h, selector)
    elif kind == "chi2-central":
        x0, _ = make_chi2_reference(decomp, h)
        out = select_chi2_central(decomp, b, x0, selector)
    elif kind == "chi2-noncentral":
        x0, _ = make_chi2_reference(decomp, h)
        out = select_chi2_noncentral(decomp, b, x0, xbar, selector)
    elif kind == "dp":
        out = select_dp(decomp, b, h, selector)
    elif kind == "rwp":
        out = select_rwp(decomp, b, h, selector)
    else:
        raise ValueError(f"unknown selector kind: {kind}")
    return out.lam, out.objective


def _initial_x(decomp, b, policy, x0):
    if policy == "data":
        if x0 is not None:
            return np.asarray(x0, dtype=float).ravel().copy()
        if decomp.m == decomp.n:
            return np.asarray(b, dtype=float).copy()
    return np.zeros(decomp.n)


def _run(decomp, b, cfg, x_true, method, x0):
    dense = isinstance(decomp, Gsvd)
    tau = cfg.tau if cfg.tau is not None else (0.005 if dense else 0.01)
    eps = cfg.epsilon if cfg.epsilon is not None else (0.0003 if dense else 0.01)
    b = np.asarray(b, dtype=float).ravel()
    x = _initial_x(decomp, b, cfg.x_init_policy, x0)
    p = decomp.p
    d = np.zeros(p)
    g = np.zeros(p)
    adaptive = isinstance(cfg.selector, SelectorConfig)
    trace = []
    lam_prev = None
    frozen_lam = None
    freeze_iter = None
    converged = False
    for k in range(1, cfg.max_iter + 1):
        t0 = time.perf_counter()
        if method == "sb":
            h = d - g
        else:
            u = decomp.apply_L(x)
            h = u * (1.0 - np.sqrt(eps**2 / (u**2 + eps**2)))
        frozen_now = frozen_lam is not None
        if frozen_now:
            lam_k, sel_val = frozen_lam, math.nan
        else:
            lam_k, sel_val = _select_lambda(decomp, b, h, x, cfg.selector)
        rc_l = math.nan if lam_prev is None else rc_lambda2(lam_k, lam_prev)
        if (
            adaptive
            and cfg.tol_lambda is not None
            and not frozen_now
            and lam_prev is not None
            and rc_l < cfg.tol_lambda
        ):
            frozen_lam = lam_k
            freeze_iter = k
        sol = solve_offset_tikhonov(decomp, b, h, lam_k)
        x_new = sol.x
        if not np.all(np.isfinite(x_new)):
            raise FloatingPointError(f"non-finite iterate at k={k}")
        prev_norm = float(np.linalg.norm(x))
        rcx = math.inf if prev_norm == 0.0 else rc_x(x_new, x)
        re_k = math.nan if x_true is None else relative_error(x_new, x_true)
        isnr_k = math.nan if x_true is None else isnr(b, x_new, x_true)
        x = x_new
        if method == "sb":
            Lx = decomp.apply_L(x)
            d = shrink(Lx + g, tau)
            g = g + Lx - d
        wall = (time.perf_counter() - t0) * 1000.0
        trace.append(
            IterationTrace(
                k=k,
                lam=float(lam_k),
                re=re_k,
                isnr=isnr_k,
                rc_x=rcx,
                rc_lambda2=rc_l,
                selector_value=sel_val,
                frozen=frozen_now,
                wall_ms=wall,
            )
        )
        lam_prev = lam_k
        if rcx < cfg.tol_x:
            converged = True
            break
    return SolveResult(x=x, trace=trace, converged=converged, freeze_iter=freeze_iter)


def sb_solve(decomp, b, cfg, x_true=None, x0=None):
    """Split Bregman outer loop. State (d, g) starts at zero; the offset of
    each subproblem is d - g, then d is soft-thresholded and the Bregman
    variable g accumulates the constraint violation L x - d.

    x0 overrides the data-policy initial iterate; pass the raw-unit data
    when b has been whitened, since x lives in solution units."""
    if cfg.method != "sb":
        raise ValueError("config method must be 'sb'")
    return _run(decomp, b, cfg, x_true, "sb", x0)


def mm_solve(decomp, b, cfg, x_true=None, x0=None):
    """Majorization-minimization outer loop. The offset is the smoothed-l1
    majorizer weight at the current iterate: u scaled elementwise by
    1 - eps / sqrt(u^2 + eps^2), with u = L x. x0 as in sb_solve; the
    first offset depends on it, so its scale matters here."""
    if cfg.method != "mm":
        raise ValueError("config method must be 'mm'")
    return _run(decomp, b, cfg, x_true, "mm", x0)
