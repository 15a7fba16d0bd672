"""Blur operators, derivative regularizers, whitening, and noisy data."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg


@dataclass(frozen=True)
class BlurSpec1D:
    """Banded symmetric Toeplitz Gaussian blur on a length-n signal."""

    n: int = 512
    sigma2: float = 24.0
    band: int = 60

    def __post_init__(self):
        if self.sigma2 <= 0.0:
            raise ValueError("sigma2 must be positive")
        if not 1 <= self.band <= self.n:
            raise ValueError("band must satisfy 1 <= band <= n")


@dataclass(frozen=True)
class BlurSpec2D:
    """Separable circulant Gaussian blur on an n_side x n_side image."""

    n_side: int = 512
    sigma2: float = 16.0
    band: int = 40

    def __post_init__(self):
        if self.sigma2 <= 0.0:
            raise ValueError("sigma2 must be positive")
        if not 1 <= self.band <= self.n_side:
            raise ValueError("band must satisfy 1 <= band <= n_side")


@dataclass
class Problem:
    """A whitened inverse problem instance.

    kind is "dense" (A and L are materialized arrays) or "spectral2d"
    (the operators live only inside the spectral decomposition; A and L
    are None). b is always the whitened data vector; sigma is the noise
    scale it was divided by, so sigma * b recovers raw data units.
    """

    kind: str
    A: object
    L: object
    b: np.ndarray
    m: int
    n: int
    p: int
    n_tilde: int
    x_true: np.ndarray | None = None
    sigma: float = 1.0


def gaussian_row(n, sigma2, band):
    """First row of the banded Gaussian blur: entry j is the Gaussian density
    at lag j for j < band, zero beyond."""
    if band > n:
        raise ValueError("band exceeds n")
    j = np.arange(n, dtype=float)
    row = np.exp(-(j**2) / (2.0 * sigma2)) / np.sqrt(2.0 * np.pi * sigma2)
    row[band:] = 0.0
    return row


def build_toeplitz_1d(spec):
    """Dense symmetric Toeplitz blur matrix from a BlurSpec1D."""
    row = gaussian_row(spec.n, spec.sigma2, spec.band)
    return scipy.linalg.toeplitz(row)


def build_derivative_1d_zero_bc(n):
    """(n-1) x n forward-difference matrix with zero boundary conditions."""
    if n < 2:
        raise ValueError("n must be at least 2")
    L = np.zeros((n - 1, n))
    idx = np.arange(n - 1)
    L[idx, idx] = -1.0
    L[idx, idx + 1] = 1.0
    return L


def circulant_derivative_eigenvalues(N):
    """Eigenvalues exp(2*pi*i*j/N) - 1 of the periodic forward difference,
    in FFT frequency order (j = 0, ..., N-1; the zero eigenvalue comes first)."""
    if N < 2:
        raise ValueError("N must be at least 2")
    j = np.arange(N)
    return np.exp(2.0j * np.pi * j / N) - 1.0


def whiten(A_tilde, b_tilde, cb):
    """Scale the operator and data so the noise covariance becomes identity.

    cb is the noise covariance: a positive scalar variance or an SPD matrix.
    Returns (A, b) with A = W^{1/2} A_tilde, b = W^{1/2} b_tilde, W = cb^{-1}.
    """
    b_tilde = np.asarray(b_tilde, dtype=float)
    if np.isscalar(cb):
        if cb <= 0.0:
            raise ValueError("scalar covariance must be positive")
        s = 1.0 / np.sqrt(cb)
        A = None if A_tilde is None else s * np.asarray(A_tilde, dtype=float)
        return A, s * b_tilde
    cb = np.asarray(cb, dtype=float)
    try:
        chol = np.linalg.cholesky(cb)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance must be symmetric positive definite") from exc
    b = scipy.linalg.solve_triangular(chol, b_tilde, lower=True)
    A = None
    if A_tilde is not None:
        A = scipy.linalg.solve_triangular(chol, np.asarray(A_tilde, dtype=float), lower=True)
    return A, b


def add_noise_snr(b_true, snr_db, seed):
    """Add white Gaussian noise rescaled so that
    20*log10(||b_true|| / ||noise||) equals snr_db exactly.

    Returns (noisy data, sigma) with sigma = ||noise||_2 / sqrt(m), the
    per-sample standard deviation used for whitening. snr_db = inf returns
    the data unchanged with sigma = 1 (whitening becomes a no-op).
    """
    b_true = np.asarray(b_true, dtype=float).ravel()
    if b_true.size == 0:
        raise ValueError("empty data vector")
    if np.isinf(snr_db):
        return b_true.copy(), 1.0
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    e = rng.standard_normal(b_true.size)
    target = np.linalg.norm(b_true) * 10.0 ** (-snr_db / 20.0)
    e *= target / np.linalg.norm(e)
    sigma = target / np.sqrt(b_true.size)
    return b_true + e, sigma
