"""Per-iteration regularization parameter selection: generalized cross
validation, central and non-central chi-squared degrees-of-freedom tests,
the discrepancy principle, and the residual whiteness principle.

Every selector is a deterministic function of its inputs. Searches share
one scheme: evaluate on a log-spaced grid, then refine (golden section for
minimizers, safeguarded Newton inside a sign-change bracket for root
finders). All filter arithmetic is expressed through the slotwise weights
(upsilon, mu) rather than their ratio gamma, so near-rank-deficient slots
cannot overflow.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.stats

from iterreg.decompositions import Gsvd, Spectral2D

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class FixedLambda:
    """Stand-in selector holding the regularization parameter constant."""

    lam: float

    def __post_init__(self):
        if not self.lam > 0.0:
            raise ValueError("lambda must be positive")


@dataclass
class SelectorConfig:
    kind: str = "gcv"  # gcv | chi2-central | chi2-noncentral | dp | rwp
    alpha: float = 0.999
    nu: float = 1.01
    delta: float | None = None
    grid_lo: float = 1e-4
    grid_hi: float = 1e4
    grid_count: int = 200
    newton_tol: float = 1e-12
    newton_max_iter: int = 60

    def __post_init__(self):
        if not self.grid_lo < self.grid_hi:
            raise ValueError("grid_lo must be below grid_hi")
        if self.grid_count < 2:
            raise ValueError("grid_count must be at least 2")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not self.nu > 1.0:
            raise ValueError("nu must exceed 1")


@dataclass
class SelectorOutcome:
    lam: float
    objective: float
    status: str  # converged | grid-fallback | no-root
    evaluations: int


def _quantile(alpha):
    return float(scipy.stats.norm.ppf(1.0 - alpha / 2.0))


class _Modal:
    """Basis-transformed inputs cached once per selector call so that each
    lambda evaluation reduces to arithmetic on length-n arrays.

    a2/mu2 are the squared diagonal weights of A and L in the joint basis
    (slots beyond n_tilde carry mu2 = 0); beta is the modal data vector over
    the first n slots and tail_sq collects the data energy on the m - n
    trailing slots that no filter touches.
    """

    def __init__(self, decomp, b, h=None, x0=None, xbar=None):
        self.decomp = decomp
        self.m = decomp.m
        self.n = decomp.n
        self.n_tilde = decomp.n_tilde
        self.mn_excess = max(decomp.m - decomp.n, 0)
        if isinstance(decomp, Gsvd):
            self.a = decomp.upsilon
            self.a2 = decomp.upsilon**2
            self.mu2 = decomp.mu**2
            full = decomp.U.T @ np.asarray(b, dtype=float)
            self.beta = full[: self.n]
            self.tail_sq = float(np.sum(full[self.n :] ** 2))
            if h is not None:
                vth = decomp.V.T @ np.asarray(h, dtype=float)
                eta = np.zeros(self.n)
                eta[: self.n_tilde] = decomp.mu[: self.n_tilde] * vth[: self.n_tilde]
                self.eta = eta
            if x0 is not None:
                self.s = self.beta - self.a * (decomp.Xinv @ np.asarray(x0, dtype=float))
            if xbar is not None:
                self.q = self.a * (decomp.Xinv @ (np.asarray(xbar, dtype=float) - np.asarray(x0, dtype=float)))
        elif isinstance(decomp, Spectral2D):
            self.a = decomp.lam_A
            self.a2 = decomp.a_abs2
            self.mu2 = decomp.m_abs2
            self.beta = np.fft.fft2(decomp.grid(b), norm="ortho")
            self.tail_sq = 0.0
            if h is not None:
                hc, hd = decomp.split_h(h)
                self.eta = np.conj(decomp.c) * np.fft.fft2(hc, norm="ortho") + np.conj(
                    decomp.d
                ) * np.fft.fft2(hd, norm="ortho")
            if x0 is not None:
                self.s = self.beta - self.a * np.fft.fft2(decomp.grid(x0), norm="ortho")
            if xbar is not None:
                diff = np.asarray(xbar, dtype=float) - np.asarray(x0, dtype=float)
                self.q = self.a * np.fft.fft2(decomp.grid(diff), norm="ortho")
        else:
            raise TypeError(f"unsupported decomposition: {type(decomp).__name__}")

    def phi(self, lam):
        return self.a2 + lam**2 * self.mu2

    def trace_term(self, lam):
        """Sum over active slots of lam^2 / (gamma_i^2 + lam^2)."""
        return lam**2 * float(np.sum(self.mu2 / self.phi(lam)))

    def residual_numerator_sq(self):
        """|a. eta - mu2 . beta|^2; the lambda-independent part of the
        modal residual a z - beta = lam^2 (a. eta - mu2 . beta) / phi."""
        return np.abs(self.a * self.eta - self.mu2 * self.beta) ** 2

    def residual_sq(self, lam, nu_abs2):
        return lam**4 * float(np.sum(nu_abs2 / self.phi(lam) ** 2)) + self.tail_sq


def gcv_value(decomp, b, h, lam):
    """Generalized cross validation functional for the offset subproblem:
    squared residual over the squared effective residual degrees of freedom."""
    if not lam > 0.0:
        raise ValueError("lambda must be positive")
    modal = _Modal(decomp, b, h=h)
    nu_abs2 = modal.residual_numerator_sq()
    denom = modal.mn_excess + modal.trace_term(lam)
    return modal.residual_sq(lam, nu_abs2) / denom**2


def jl_value(decomp, b, x0, lam):
    """Value of the offset Tikhonov functional at its minimizer, for the
    subproblem referenced to x0 (offset h = L x0): equals
    ||A x_lam - b||^2 + lam^2 ||L (x_lam - x0)||^2."""
    if not lam > 0.0:
        raise ValueError("lambda must be positive")
    modal = _Modal(decomp, b, x0=x0)
    s_abs2 = np.abs(modal.s) ** 2
    return lam**2 * float(np.sum(modal.mu2 * s_abs2 / modal.phi(lam))) + modal.tail_sq


def noncentrality(decomp, xbar, x0, lam):
    """Non-centrality parameter of the dof statistic when the solution mean
    xbar differs from the reference x0."""
    if not lam > 0.0:
        raise ValueError("lambda must be positive")
    modal = _Modal(decomp, np.zeros(decomp.m), x0=x0, xbar=xbar)
    q_abs2 = np.abs(modal.q) ** 2
    return lam**2 * float(np.sum(modal.mu2 * q_abs2 / modal.phi(lam)))


def whiteness(residual_2d):
    """Spectral fourth-moment whiteness measure of a square residual image:
    1/N^2 for a flat spectrum, approaching 1 as energy concentrates."""
    R = np.asarray(residual_2d, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError("residual must be a square 2-D array")
    p2 = np.abs(np.fft.fft2(R)) ** 2
    total = float(p2.sum())
    if total == 0.0:
        raise ValueError("whiteness undefined for a zero residual")
    return float(np.sum(p2**2)) / total**2


def _log_grid(cfg):
    return np.logspace(math.log10(cfg.grid_lo), math.log10(cfg.grid_hi), cfg.grid_count)


def _golden_min(f, lo, hi, tol=1e-8, max_iter=200):
    """Golden-section minimization over [lo, hi] in log-lambda.
    Returns (lam, value, evaluations)."""
    a, b = math.log(lo), math.log(hi)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(math.exp(c)), f(math.exp(d))
    evals = 2
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(math.exp(d))
        evals += 1
    if fc < fd:
        return math.exp(c), fc, evals
    return math.exp(d), fd, evals


def _grid_then_golden(objective, cfg):
    """Shared minimizer: coarse log grid, then golden-section refinement on
    the bracket around the grid minimizer. Endpoint minima are returned
    as-is with status grid-fallback."""
    grid = _log_grid(cfg)
    vals = np.array([objective(lam) for lam in grid])
    evals = grid.size
    if not np.any(np.isfinite(vals)):
        raise FloatingPointError("selection objective returned no finite values")
    i = int(np.nanargmin(vals))
    if i == 0 or i == grid.size - 1:
        return SelectorOutcome(float(grid[i]), float(vals[i]), "grid-fallback", evals)
    lam, val, extra = _golden_min(objective, grid[i - 1], grid[i + 1])
    evals += extra
    if val > vals[i]:
        lam, val = float(grid[i]), float(vals[i])
    return SelectorOutcome(float(lam), float(val), "converged", evals)


def select_gcv(decomp, b, h, cfg):
    """Minimize the GCV functional over the search grid, refining with
    golden-section search around the grid minimizer."""
    modal = _Modal(decomp, b, h=h)
    nu_abs2 = modal.residual_numerator_sq()

    def objective(lam):
        denom = modal.mn_excess + modal.trace_term(lam)
        return modal.residual_sq(lam, nu_abs2) / denom**2

    return _grid_then_golden(objective, cfg)


def select_rwp(decomp, b, h, cfg):
    """Minimize the residual whiteness measure; defined only for the 2-D
    spectral path, whose residual is an image."""
    if not isinstance(decomp, Spectral2D):
        raise ValueError("residual whiteness selection requires the 2-D spectral path")
    modal = _Modal(decomp, b, h=h)
    nu_abs2 = modal.residual_numerator_sq()

    def objective(lam):
        r_abs2 = lam**4 * nu_abs2 / modal.phi(lam) ** 2
        total = float(r_abs2.sum())
        if total == 0.0:
            return math.inf
        return float(np.sum(r_abs2**2)) / total**2

    return _grid_then_golden(objective, cfg)


def _newton_in_bracket(F, dF, t_lo, t_hi, f_lo, f_hi, accept, cfg, evals):
    """Safeguarded Newton in t = log(lambda) inside a sign-change bracket.

    Falls back to bisection whenever the Newton step leaves the bracket.
    accept(lam, value) -> bool decides early termination (the dof tests
    stop inside their confidence band, not at the exact root).
    """
    t = 0.5 * (t_lo + t_hi)
    for _ in range(cfg.newton_max_iter):
        lam = math.exp(t)
        val = F(lam)
        evals += 1
        if accept(lam, val):
            return SelectorOutcome(lam, val, "converged", evals)
        if (val < 0.0) == (f_lo < 0.0):
            t_lo, f_lo = t, val
        else:
            t_hi, f_hi = t, val
        slope = dF(lam) * lam  # derivative in t
        t_new = t - val / slope if slope != 0.0 else math.nan
        if not math.isfinite(t_new) or not (min(t_lo, t_hi) < t_new < max(t_lo, t_hi)):
            t_new = 0.5 * (t_lo + t_hi)
        if abs(t_new - t) <= cfg.newton_tol:
            lam = math.exp(t_new)
            val = F(lam)
            evals += 1
            status = "converged" if accept(lam, val) else "grid-fallback"
            return SelectorOutcome(lam, val, status, evals)
        t = t_new
    lam = math.exp(t)
    val = F(lam)
    return SelectorOutcome(lam, val, "grid-fallback", evals + 1)


def _select_dof_root(modal, mtilde, cfg, q_abs2=None):
    """Shared root-finder for the central (q_abs2 None) and non-central
    dof statistics."""
    s_abs2 = np.abs(modal.s) ** 2
    z = _quantile(cfg.alpha)

    def F(lam):
        phi = modal.phi(lam)
        jl = lam**2 * float(np.sum(modal.mu2 * s_abs2 / phi)) + modal.tail_sq
        shift = 0.0
        if q_abs2 is not None:
            shift = lam**2 * float(np.sum(modal.mu2 * q_abs2 / phi))
        return jl - (mtilde + shift)

    def dF(lam):
        phi2 = modal.phi(lam) ** 2
        stilde = float(np.sum(modal.a2 * modal.mu2 * s_abs2 / phi2))
        qtilde = 0.0
        if q_abs2 is not None:
            qtilde = float(np.sum(modal.a2 * modal.mu2 * q_abs2 / phi2))
        return 2.0 * lam * (stilde - qtilde)

    def accept(lam, val):
        shift = 0.0
        if q_abs2 is not None:
            phi = modal.phi(lam)
            shift = lam**2 * float(np.sum(modal.mu2 * q_abs2 / phi))
        return abs(val) <= z * math.sqrt(2.0 * mtilde + 4.0 * shift)

    grid = _log_grid(cfg)
    vals = np.array([F(lam) for lam in grid])
    evals = grid.size
    sign_change = np.nonzero(np.diff(np.signbit(vals)))[0]
    if sign_change.size == 0:
        i = int(np.argmin(np.abs(vals)))
        return SelectorOutcome(float(grid[i]), float(vals[i]), "no-root", evals)
    i = int(sign_change[0])
    return _newton_in_bracket(
        F,
        dF,
        math.log(grid[i]),
        math.log(grid[i + 1]),
        vals[i],
        vals[i + 1],
        accept,
        cfg,
        evals,
    )


def select_chi2_central(decomp, b, x0, cfg):
    """Find lambda whose functional value matches its chi-squared degrees
    of freedom within the confidence band; Newton inside a grid bracket."""
    modal = _Modal(decomp, b, x0=x0)
    mtilde = decomp.n_tilde + max(decomp.m - decomp.n, 0)
    return _select_dof_root(modal, mtilde, cfg)


def select_chi2_noncentral(decomp, b, x0, xbar, cfg):
    """Central test shifted by the non-centrality term induced by the
    current solution estimate xbar; the statistic may lack a root, in which
    case the grid argmin of |F_C| is returned with status no-root."""
    modal = _Modal(decomp, b, x0=x0, xbar=xbar)
    mtilde = decomp.n_tilde + max(decomp.m - decomp.n, 0)
    q_abs2 = np.abs(modal.q) ** 2
    return _select_dof_root(modal, mtilde, cfg, q_abs2=q_abs2)


def select_dp(decomp, b, h, cfg):
    """Largest lambda whose residual stays within nu * delta, by bisection
    on the log grid (the residual is nondecreasing in lambda)."""
    if cfg.delta is None or cfg.delta <= 0.0:
        raise ValueError("discrepancy selection needs a positive delta")
    modal = _Modal(decomp, b, h=h)
    nu_abs2 = modal.residual_numerator_sq()
    target = cfg.nu * cfg.delta

    def resid(lam):
        return math.sqrt(modal.residual_sq(lam, nu_abs2))

    lo, hi = cfg.grid_lo, cfg.grid_hi
    r_lo = resid(lo)
    evals = 1
    if r_lo > target:
        return SelectorOutcome(lo, r_lo - target, "no-root", evals)
    r_hi = resid(hi)
    evals += 1
    if r_hi <= target:
        return SelectorOutcome(hi, r_hi - target, "converged", evals)
    t_lo, t_hi = math.log(lo), math.log(hi)
    while t_hi - t_lo > 1e-10:
        t_mid = 0.5 * (t_lo + t_hi)
        r_mid = resid(math.exp(t_mid))
        evals += 1
        if r_mid <= target:
            t_lo = t_mid
        else:
            t_hi = t_mid
    lam = math.exp(t_lo)
    return SelectorOutcome(lam, resid(lam) - target, "converged", evals + 1)
