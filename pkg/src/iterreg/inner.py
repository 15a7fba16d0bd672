"""The offset Tikhonov subproblem: for fixed lambda, minimize
(1/2)||A x - b||^2 + (lambda^2/2)||L x - h||^2 in either decomposition basis."""

from dataclasses import dataclass

import numpy as np

from iterreg.decompositions import Gsvd, Spectral2D


@dataclass
class InnerSolution:
    x: np.ndarray
    fidelity: float  # ||A x - b||^2
    reg: float  # ||L x - h||^2
    lam: float


def _check_lam(lam):
    if not lam > 0.0:
        raise ValueError("lambda must be positive")


def _gsvd_coeffs(decomp, b, h, lam):
    """Modal solution coefficients z with x = X z, plus the modal data and
    offset vectors needed for the fidelity and regularization terms."""
    beta = decomp.U.T @ np.asarray(b, dtype=float)
    vth = decomp.V.T @ np.asarray(h, dtype=float)
    n, nt = decomp.n, decomp.n_tilde
    eta = np.zeros(n)
    eta[:nt] = decomp.mu[:nt] * vth[:nt]
    phi = decomp.upsilon**2 + lam**2 * decomp.mu**2
    z = (decomp.upsilon * beta[:n] + lam**2 * eta) / phi
    return z, beta, vth


def solve_offset_tikhonov(decomp, b, h, lam):
    """Minimize (1/2)||Ax - b||^2 + (lambda^2/2)||Lx - h||^2 by diagonal
    filtering in the decomposition basis."""
    _check_lam(lam)
    if isinstance(decomp, Gsvd):
        z, beta, vth = _gsvd_coeffs(decomp, b, h, lam)
        x = decomp.X @ z
        n, nt = decomp.n, decomp.n_tilde
        fid = float(np.sum((decomp.upsilon * z - beta[:n]) ** 2) + np.sum(beta[n:] ** 2))
        reg = float(
            np.sum((decomp.mu[:nt] * z[:nt] - vth[:nt]) ** 2) + np.sum(vth[nt:] ** 2)
        )
        return InnerSolution(x, fid, reg, lam)
    if isinstance(decomp, Spectral2D):
        bhat = np.fft.fft2(decomp.grid(b), norm="ortho")
        hc, hd = decomp.split_h(h)
        hch = np.fft.fft2(hc, norm="ortho")
        hdh = np.fft.fft2(hd, norm="ortho")
        phi = decomp.a_abs2 + lam**2 * decomp.m_abs2
        eta = np.conj(decomp.c) * hch + np.conj(decomp.d) * hdh
        zhat = (np.conj(decomp.lam_A) * bhat + lam**2 * eta) / phi
        x = np.fft.ifft2(zhat, norm="ortho").real.ravel()
        fid = float(np.sum(np.abs(decomp.lam_A * zhat - bhat) ** 2))
        reg = float(
            np.sum(np.abs(decomp.c * zhat - hch) ** 2)
            + np.sum(np.abs(decomp.d * zhat - hdh) ** 2)
        )
        return InnerSolution(x, fid, reg, lam)
    raise TypeError(f"unsupported decomposition: {type(decomp).__name__}")


def residual_norm(decomp, b, h, lam):
    """||A x_lambda - b||_2 evaluated from filter coefficients, without
    forming x_lambda."""
    _check_lam(lam)
    if isinstance(decomp, Gsvd):
        z, beta, _ = _gsvd_coeffs(decomp, b, h, lam)
        n = decomp.n
        return float(
            np.sqrt(np.sum((decomp.upsilon * z - beta[:n]) ** 2) + np.sum(beta[n:] ** 2))
        )
    if isinstance(decomp, Spectral2D):
        bhat = np.fft.fft2(decomp.grid(b), norm="ortho")
        hc, hd = decomp.split_h(h)
        eta = np.conj(decomp.c) * np.fft.fft2(hc, norm="ortho") + np.conj(
            decomp.d
        ) * np.fft.fft2(hd, norm="ortho")
        phi = decomp.a_abs2 + lam**2 * decomp.m_abs2
        zhat = (np.conj(decomp.lam_A) * bhat + lam**2 * eta) / phi
        return float(np.sqrt(np.sum(np.abs(decomp.lam_A * zhat - bhat) ** 2)))
    raise TypeError(f"unsupported decomposition: {type(decomp).__name__}")
