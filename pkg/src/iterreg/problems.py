"""Experiment assembly: ground truth, blur, noise, whitening, and the
matching joint decomposition for the 1-D dense and 2-D spectral paths."""

from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from iterreg import fileio
from iterreg.decompositions import gsvd, spectral_2d
from iterreg.operators import (
    BlurSpec1D,
    BlurSpec2D,
    Problem,
    add_noise_snr,
    build_derivative_1d_zero_bc,
    build_toeplitz_1d,
    gaussian_row,
    whiten,
)
from iterreg.solvers import SolverConfig

# Block edges are fractions of the length times 512, so the same layout
# scales to other sizes. Chosen for sharp edges at several widths and
# heights, including one narrow feature; normalized to unit Euclidean norm.
SIGNAL_BLOCKS = (
    (60, 140, 1.0),
    (180, 260, 0.5),
    (290, 350, 0.85),
    (370, 384, 1.3),
    (420, 490, -0.55),
)

# Default zoom window of 2-D reconstructions: the central 128x128 region
# (rows and cols [192, 320) at n_side = 512), scaled with the image.
ZOOM_FRACTION = (192 / 512, 320 / 512)


@dataclass
class SweepConfig:
    lo: float = 1e-1
    hi: float = 1e3
    count: int = 121

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("sweep count must be at least 2")
        if not 0.0 < self.lo < self.hi:
            raise ValueError("sweep bounds must satisfy 0 < lo < hi")

    def grid(self):
        return np.logspace(np.log10(self.lo), np.log10(self.hi), self.count)


@dataclass
class ExperimentConfig:
    problem: str = "1d"  # 1d | 2d
    n: int = 512  # signal length (1d) or image side (2d)
    sigma2: float | None = None  # blur variance; None -> 24 (1d) / 16 (2d)
    band: int | None = None  # blur support; None -> 60 (1d) / 40 (2d)
    snr_db: float = 20.0
    seed: int = 0
    # Zero start makes the first MM step a plain Tikhonov solve; a data
    # start seeds flat regions with noise that the majorant weights keep
    # alive for tens of extra iterations.
    solver: SolverConfig = field(
        default_factory=lambda: SolverConfig(x_init_policy="zero")
    )
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output_dir: str = "out"
    image: str = "camera"  # 2d ground truth: camera | blocks

    def __post_init__(self):
        if self.problem not in ("1d", "2d"):
            raise ValueError(f"unknown problem kind: {self.problem}")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.image not in ("camera", "blocks"):
            raise ValueError(f"unknown image choice: {self.image}")


def piecewise_signal(n=512):
    """Piecewise-constant 1-D test signal with sharp edges, unit norm."""
    x = np.zeros(n)
    for lo, hi, amp in SIGNAL_BLOCKS:
        x[int(lo * n / 512) : int(hi * n / 512)] = amp
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        raise ValueError(f"signal degenerate at n={n}")
    return x / nrm


def blocks_image(n_side):
    """Deterministic piecewise-constant image in [0, 1] for any side length;
    stands in for the photographic ground truth in small tests."""
    n = n_side
    img = np.zeros((n, n))
    img[n // 8 : n // 2, n // 6 : n // 2] = 0.8
    img[n // 2 : 7 * n // 8, n // 3 : 5 * n // 6] = 0.4
    img[3 * n // 8 : 5 * n // 8, 3 * n // 8 : 5 * n // 8] = 1.0
    return img


def camera_image():
    """512x512 photographic ground truth, stored as an 8-bit graymap and
    used at unit scale (divided by 255)."""
    path = resources.files("iterreg").joinpath("assets/camera512.pgm")
    with resources.as_file(path) as p:
        img = fileio.read_pgm(p)
    return img.astype(float) / 255.0


def zoom_window(n_side):
    lo = int(ZOOM_FRACTION[0] * n_side)
    hi = int(ZOOM_FRACTION[1] * n_side)
    return lo, hi


def build_problem(cfg):
    """Construct (Problem, decomposition) for the configured experiment:
    blur the ground truth, add noise at snr_db, whiten, and factorize."""
    if cfg.problem == "1d":
        spec = BlurSpec1D(
            n=cfg.n,
            sigma2=24.0 if cfg.sigma2 is None else cfg.sigma2,
            band=60 if cfg.band is None else cfg.band,
        )
        A_raw = build_toeplitz_1d(spec)
        x_true = piecewise_signal(cfg.n)
        b_clean = A_raw @ x_true
        b_noisy, sigma = add_noise_snr(b_clean, cfg.snr_db, cfg.seed)
        A, b = whiten(A_raw, b_noisy, sigma**2)
        L = build_derivative_1d_zero_bc(cfg.n)
        decomp = gsvd(A, L)
        problem = Problem(
            kind="dense",
            A=A,
            L=L,
            b=b,
            m=cfg.n,
            n=cfg.n,
            p=cfg.n - 1,
            n_tilde=decomp.n_tilde,
            x_true=x_true,
            sigma=sigma,
        )
        return problem, decomp
    spec = BlurSpec2D(
        n_side=cfg.n,
        sigma2=16.0 if cfg.sigma2 is None else cfg.sigma2,
        band=40 if cfg.band is None else cfg.band,
    )
    row = gaussian_row(spec.n_side, spec.sigma2, spec.band)
    if cfg.image == "camera":
        if cfg.n != 512:
            raise ValueError("the photographic ground truth is 512x512")
        img = camera_image()
    else:
        img = blocks_image(cfg.n)
    x_true = img.ravel()
    plain = spectral_2d(row, cfg.n)
    b_clean = plain.apply_A(x_true)
    b_noisy, sigma = add_noise_snr(b_clean, cfg.snr_db, cfg.seed)
    _, b = whiten(None, b_noisy, sigma**2)
    decomp = spectral_2d(row, cfg.n, whiten_scale=1.0 / sigma)
    n = cfg.n * cfg.n
    problem = Problem(
        kind="spectral2d",
        A=None,
        L=None,
        b=b,
        m=n,
        n=n,
        p=2 * n,
        n_tilde=decomp.n_tilde,
        x_true=x_true,
        sigma=sigma,
    )
    return problem, decomp
