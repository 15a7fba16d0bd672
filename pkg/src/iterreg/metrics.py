"""Scalar diagnostics shared by the solvers and the experiment harness."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class IterationTrace:
    """One record per outer iteration of a solver run.

    selector_value holds the selection objective at the accepted lambda
    (GCV value, dof-test statistic, residual gap, or whiteness measure);
    it is nan on iterations where lambda was frozen and not re-selected.
    """

    k: int
    lam: float
    re: float
    isnr: float
    rc_x: float
    rc_lambda2: float
    selector_value: float
    frozen: bool
    wall_ms: float


def relative_error(x, x_true):
    """Euclidean norm of the error relative to the norm of the target."""
    x = np.asarray(x, dtype=float).ravel()
    x_true = np.asarray(x_true, dtype=float).ravel()
    if x.shape != x_true.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {x_true.shape}")
    denom = np.linalg.norm(x_true)
    if denom == 0.0:
        raise ValueError("x_true has zero norm")
    return float(np.linalg.norm(x - x_true) / denom)


def isnr(b, x, x_true):
    """Improvement in signal-to-noise ratio of x over the raw data b, in dB.

    Returns math.inf when x matches x_true exactly (the ratio is unbounded);
    the sentinel survives a CSV round trip as "inf".
    """
    b = np.asarray(b, dtype=float).ravel()
    x = np.asarray(x, dtype=float).ravel()
    x_true = np.asarray(x_true, dtype=float).ravel()
    if not (b.shape == x.shape == x_true.shape):
        raise ValueError("b, x, x_true must have equal lengths")
    err = np.linalg.norm(x - x_true)
    if err == 0.0:
        return math.inf
    return float(20.0 * np.log10(np.linalg.norm(b - x_true) / err))


def rc_x(x_k, x_prev):
    """Relative change between consecutive iterates."""
    x_k = np.asarray(x_k, dtype=float).ravel()
    x_prev = np.asarray(x_prev, dtype=float).ravel()
    denom = np.linalg.norm(x_prev)
    if denom == 0.0:
        raise ValueError("previous iterate has zero norm")
    return float(np.linalg.norm(x_k - x_prev) / denom)


def rc_lambda2(l_k, l_prev):
    """Relative change of the squared regularization parameter."""
    if l_k <= 0.0 or l_prev <= 0.0:
        raise ValueError("regularization parameters must be positive")
    return abs(l_k**2 - l_prev**2) / l_prev**2
