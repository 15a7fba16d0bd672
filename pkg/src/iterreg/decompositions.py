"""Joint factorizations of the operator pair {A, L}: a dense GSVD for
matrix problems and a unitary Fourier factorization for the 2-D periodic
deblurring setup, plus the A-weighted generalized inverse of L."""

import numpy as np
import scipy.linalg

from iterreg.operators import circulant_derivative_eigenvalues

# mu at or below this counts as a zero generalized singular value of L
RANK_TOL = 1e-14


class Gsvd:
    """Generalized SVD of a pair (A, L): A = U diag-like(upsilon) Xinv and
    L = V diag-like(mu) Xinv with U, V orthogonal and X invertible.

    upsilon (length n) is nondecreasing with exact ones on the trailing
    n - n_tilde slots where L has no action; mu (length n) is nonincreasing
    with zeros on those slots; upsilon**2 + mu**2 == 1 slotwise. The
    diagonal factor of A carries m - n additional zero rows, that of L is
    p x n with mu on the main diagonal.
    """

    kind = "dense"

    def __init__(self, U, V, X, Xinv, upsilon, mu, n_tilde, L):
        self.U = U
        self.V = V
        self.X = X
        self.Xinv = Xinv
        self.upsilon = upsilon
        self.mu = mu
        self.n_tilde = n_tilde
        self.m = U.shape[0]
        self.p = V.shape[0]
        self.n = X.shape[0]
        self._L = L

    @property
    def gamma(self):
        """Generalized singular values upsilon/mu over the active slots."""
        return self.upsilon[: self.n_tilde] / self.mu[: self.n_tilde]

    def apply_L(self, x):
        return self._L @ x


class Spectral2D:
    """Fourier factorization of the whitened separable circulant blur
    together with the periodic first-derivative pair on an N x N grid.

    lam_A, c, d are (N, N) grids of complex eigenvalues over 2-D
    frequencies; c varies along columns (derivative within each row) and
    d along rows. Solution and data vectors are C-order flattened images.
    """

    kind = "spectral2d"

    def __init__(self, lam_A, c, d, N):
        self.lam_A = lam_A
        self.c = c
        self.d = d
        self.N = N
        self.n = N * N
        self.m = self.n
        self.p = 2 * self.n
        self.m_abs2 = np.abs(c) ** 2 + np.abs(d) ** 2
        self.a_abs2 = np.abs(lam_A) ** 2
        self.n_tilde = int(np.count_nonzero(self.m_abs2 > 0.0))

    @property
    def gamma(self):
        mask = self.m_abs2 > 0.0
        return np.sqrt(self.a_abs2[mask] / self.m_abs2[mask])

    def grid(self, v):
        return np.asarray(v).reshape(self.N, self.N)

    def apply_A(self, x):
        xhat = np.fft.fft2(self.grid(x))
        return np.fft.ifft2(self.lam_A * xhat).real.ravel()

    def apply_L(self, x):
        xhat = np.fft.fft2(self.grid(x))
        top = np.fft.ifft2(self.c * xhat).real
        bot = np.fft.ifft2(self.d * xhat).real
        return np.concatenate([top.ravel(), bot.ravel()])

    def split_h(self, h):
        h = np.asarray(h, dtype=float)
        if h.size != self.p:
            raise ValueError(f"offset length {h.size}, expected {self.p}")
        return self.grid(h[: self.n]), self.grid(h[self.n :])


def gsvd(A, L):
    """Factor the pair (A, L) via QR of the stacked matrix followed by a
    cosine-sine decomposition of the resulting orthogonal factor.

    Requires m >= n and the invertibility condition N(A) & N(L) = {0}
    (the stacked matrix must have full column rank).
    """
    A = np.asarray(A, dtype=float)
    L = np.asarray(L, dtype=float)
    m, n = A.shape
    p, nL = L.shape
    if nL != n:
        raise ValueError("A and L must have the same number of columns")
    if m < n:
        raise ValueError("gsvd requires m >= n")
    Q, R = np.linalg.qr(np.vstack([A, L]), mode="complete")
    Rs = R[:n, :n]
    diag = np.abs(np.diag(Rs))
    if diag.min() <= 1e-12 * max(diag.max(), 1e-300):
        raise ValueError("invertibility condition violated: stacked [A; L] is rank deficient")
    (u1, u2), theta, (v1h, _) = scipy.linalg.cossin(Q, p=m, q=n, separate=True)
    # The left blocks of Q factor as u1 @ Cmat @ v1h and u2 @ Smat @ v1h with
    # cosines descending on the main diagonal of Cmat (leading exact ones fill
    # the n - len(theta) slots) and sines ascending on the (p - n)-offset
    # diagonal of Smat. Reversing the first n columns of u1, all columns of
    # u2, and the rows of v1h reorders both diagonals to the nondecreasing-
    # upsilon convention with the zero-mu slots trailing.
    r = theta.size
    cvec = np.ones(n)
    cvec[n - r :] = np.cos(theta)
    svec = np.zeros(n)
    svec[n - r :] = np.sin(theta)
    upsilon = cvec[::-1].copy()
    mu = svec[::-1].copy()
    U = u1.copy()
    U[:, :n] = u1[:, n - 1 :: -1]
    V = u2[:, ::-1].copy()
    Wt = v1h[::-1, :]
    Xinv = Wt @ Rs
    X = scipy.linalg.solve_triangular(Rs, Wt.T)
    n_tilde = int(np.count_nonzero(mu > RANK_TOL))
    mu[n_tilde:] = 0.0
    return Gsvd(U, V, X, Xinv, upsilon, mu, n_tilde, L)


def spectral_2d(blur_row, N, whiten_scale=1.0):
    """Spectral factorization of the whitened blur C_z (x) C_z with the
    stacked periodic derivative pair [I (x) D; D (x) I] on an N x N grid.

    blur_row is the first row of the circulant C_z. The whitening constant
    multiplies the blur eigenvalues once here, never per iteration.
    """
    blur_row = np.asarray(blur_row, dtype=float)
    if blur_row.size != N:
        raise ValueError("blur_row length must equal N")
    first_col = np.roll(blur_row[::-1], 1)
    lam1 = np.fft.fft(first_col)
    lam_A = whiten_scale * np.outer(lam1, lam1)
    lam_L = circulant_derivative_eigenvalues(N)
    c = np.tile(lam_L, (N, 1))
    d = np.tile(lam_L[:, None], (1, N))
    return Spectral2D(lam_A, c, d, N)


def aw_pinv_apply(decomp, h):
    """Apply the A-weighted generalized inverse of L to a p-vector,
    mapping an offset in regularizer space back to solution space."""
    h = np.asarray(h, dtype=float)
    if isinstance(decomp, Gsvd):
        if h.size != decomp.p:
            raise ValueError(f"offset length {h.size}, expected {decomp.p}")
        vth = decomp.V.T @ h
        coef = np.zeros(decomp.n)
        nt = decomp.n_tilde
        coef[:nt] = vth[:nt] / decomp.mu[:nt]
        return decomp.X @ coef
    hc, hd = decomp.split_h(h)
    num = np.conj(decomp.c) * np.fft.fft2(hc) + np.conj(decomp.d) * np.fft.fft2(hd)
    xhat = np.zeros_like(num)
    mask = decomp.m_abs2 > 0.0
    xhat[mask] = num[mask] / decomp.m_abs2[mask]
    return np.fft.ifft2(xhat).real.ravel()


def ll_pinv_apply(decomp, h):
    """Apply L L^dagger_A, the projection of an offset vector onto the
    range of L (identity when L has full row rank)."""
    h = np.asarray(h, dtype=float)
    if isinstance(decomp, Gsvd):
        if h.size != decomp.p:
            raise ValueError(f"offset length {h.size}, expected {decomp.p}")
        vth = decomp.V.T @ h
        vth[decomp.n_tilde :] = 0.0
        return decomp.V @ vth
    return decomp.apply_L(aw_pinv_apply(decomp, h))
