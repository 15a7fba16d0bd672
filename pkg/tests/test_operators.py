import math

import numpy as np
import pytest

from iterreg.operators import (
    BlurSpec1D,
    BlurSpec2D,
    add_noise_snr,
    build_derivative_1d_zero_bc,
    build_toeplitz_1d,
    circulant_derivative_eigenvalues,
    gaussian_row,
    whiten,
)


def test_gaussian_row_small_case():
    # n=4, sigma2=0.5, band=2: entries 1/sqrt(pi), e^-1/sqrt(pi), then banded out
    r = gaussian_row(4, 0.5, 2)
    s = 1.0 / math.sqrt(math.pi)
    assert r == pytest.approx([s, math.exp(-1.0) * s, 0.0, 0.0], rel=1e-12)


def test_gaussian_row_experiment_scale():
    r = gaussian_row(512, 24.0, 60)
    assert r[0] == pytest.approx(1.0 / math.sqrt(2.0 * math.pi * 24.0), rel=1e-12)
    assert np.count_nonzero(r) == 60
    assert np.all(r[60:] == 0.0)
    # density decays monotonically inside the band
    assert np.all(np.diff(r[:60]) < 0.0)


def test_toeplitz_blur_structure():
    T = build_toeplitz_1d(BlurSpec1D())
    assert T.shape == (512, 512)
    assert np.array_equal(T, T.T)
    # interior rows hold the full kernel mass
    assert T[256].sum() == pytest.approx(1.0, abs=5e-4)
    # boundary rows are truncated, so they sum to less
    assert T[0].sum() < T[256].sum()


def test_blur_spec_validation():
    with pytest.raises(ValueError):
        BlurSpec1D(n=512, sigma2=-1.0, band=60)
    with pytest.raises(ValueError):
        BlurSpec1D(n=64, sigma2=24.0, band=80)
    with pytest.raises(ValueError):
        BlurSpec2D(n_side=512, sigma2=16.0, band=0)


def test_derivative_zero_bc():
    D = build_derivative_1d_zero_bc(3)
    assert np.array_equal(D, np.array([[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0]]))
    D = build_derivative_1d_zero_bc(128)
    assert D.shape == (127, 128)
    assert np.linalg.matrix_rank(D) == 127
    # constants are the only null direction at full size is false under
    # zero bc (the matrix is not square); rows annihilate constants though
    assert np.abs(D @ np.ones(128)).max() == 0.0


def test_circulant_derivative_eigenvalues():
    lam = circulant_derivative_eigenvalues(4)
    assert lam[0] == 0.0
    assert lam[1] == pytest.approx(-1.0 + 1.0j)
    assert lam[2] == pytest.approx(-2.0 + 0.0j)
    # matches FFT of the first column of the forward-difference circulant
    N = 8
    Dc = np.zeros((N, N))
    for i in range(N):
        Dc[i, i] = -1.0
        Dc[i, (i + 1) % N] = 1.0
    ref = np.fft.fft(Dc[:, 0])
    assert np.abs(circulant_derivative_eigenvalues(N) - ref).max() < 1e-12


def test_whiten_scalar_covariance():
    A = np.eye(3)
    b = np.ones(3)
    Aw, bw = whiten(A, b, 4.0)
    assert np.array_equal(Aw, 0.5 * A)
    assert np.array_equal(bw, 0.5 * b)


def test_whiten_matrix_covariance_normalizes_noise():
    rng = np.random.default_rng(3)
    C = np.array([[2.0, 0.3], [0.3, 1.0]])
    e = rng.multivariate_normal(np.zeros(2), C, size=100000).T
    _, ew = whiten(np.eye(2), e, C)
    assert np.abs(ew.var(axis=1) - 1.0).max() < 0.02


def test_whiten_rejects_indefinite_covariance():
    with pytest.raises(ValueError):
        whiten(np.eye(2), np.ones(2), np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_add_noise_snr_hits_target_exactly():
    rng = np.random.default_rng(5)
    b = rng.standard_normal(256)
    for snr in (10.0, 20.0, 40.0):
        noisy, sigma = add_noise_snr(b, snr, 11)
        ratio = np.sum(b**2) / np.sum((noisy - b) ** 2)
        assert 10.0 * math.log10(ratio) == pytest.approx(snr, abs=1e-10)
        assert sigma == pytest.approx(np.linalg.norm(noisy - b) / math.sqrt(256))


def test_add_noise_snr_deterministic_and_noiseless():
    b = np.ones(64)
    b1, s1 = add_noise_snr(b, 20.0, 5)
    b2, s2 = add_noise_snr(b, 20.0, 5)
    assert np.array_equal(b1, b2) and s1 == s2
    b3, s3 = add_noise_snr(b, math.inf, 5)
    assert np.array_equal(b3, b) and s3 == 1.0
