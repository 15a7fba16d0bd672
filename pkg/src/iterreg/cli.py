"""Command-line entry point. Subcommands: run-1d, run-2d (single solver
run), sweep (fixed-lambda oracle), suite (full method-by-selector grid),
selftest (fast internal consistency checks on small instances).

Exit codes: 0 success, 2 partial row failures in a suite, 1 fatal error.
"""

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

from iterreg import fileio
from iterreg.problems import ExperimentConfig, build_problem
from iterreg.selectors import SelectorConfig
from iterreg.suite import optimal_sweep, run_single, run_suite

SELECTOR_NAMES = ("gcv", "chi2-central", "chi2-noncentral", "dp", "rwp")


def _add_common(sp):
    sp.add_argument("--config", help="config file (sectioned key=value)")
    sp.add_argument("--seed", type=int, help="RNG seed for the noise draw")
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--snr", help="noise level in dB, or 'inf'")


def _assemble(args, problem=None):
    cfg = fileio.load_config(args.config) if args.config else ExperimentConfig()
    if problem is not None:
        cfg.problem = problem
    elif getattr(args, "problem", None):
        cfg.problem = args.problem
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "out", None):
        cfg.output_dir = args.out
    if getattr(args, "snr", None) is not None:
        cfg.snr_db = math.inf if args.snr == "inf" else float(args.snr)
    if getattr(args, "method", None):
        cfg.solver = replace(cfg.solver, method=args.method)
    if getattr(args, "tol_lambda", None) is not None:
        tol = None if args.tol_lambda == "off" else float(args.tol_lambda)
        cfg.solver = replace(cfg.solver, tol_lambda=tol)
    return cfg


def _cmd_run(args, problem_kind):
    cfg = _assemble(args, problem_kind)
    problem, decomp = build_problem(cfg)
    name = args.selector or "gcv"
    proto = cfg.solver.selector
    if not isinstance(proto, SelectorConfig):
        proto = SelectorConfig()
    if name == "dp":
        delta = proto.delta if proto.delta is not None else math.sqrt(problem.m)
        sel = replace(proto, kind=name, delta=delta)
    else:
        sel = replace(proto, kind=name)
    run_cfg = replace(cfg.solver, selector=sel)
    result, wall = run_single(problem, decomp, run_cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    tol = run_cfg.tol_lambda
    tag = f"{run_cfg.method}_{name}_{'tolL-off' if tol is None else f'tolL-{tol:g}'}"
    trace_path = out / f"trace_{tag}.csv"
    fileio.write_trace_csv(trace_path, result.trace, cfg.seed)
    if problem.kind == "dense":
        recon_path = out / f"recon_{tag}.csv"
        fileio.write_signal_csv(recon_path, result.x)
    else:
        side = int(math.isqrt(problem.n))
        recon_path = out / f"recon_{tag}.pgm"
        fileio.write_pgm(recon_path, result.x.reshape(side, side))
    last = result.trace[-1]
    frozen = "-" if result.freeze_iter is None else str(result.freeze_iter)
    print(
        f"method={run_cfg.method} selector={name} lambda={last.lam:.6g} "
        f"re={last.re:.4f} isnr={last.isnr:.2f} iters={last.k} "
        f"frozen_at={frozen} wall_s={wall:.2f}"
    )
    print(f"trace: {trace_path}")
    print(f"reconstruction: {recon_path}")
    return 0


def _cmd_sweep(args):
    cfg = _assemble(args)
    problem, decomp = build_problem(cfg)
    lam_star, table = optimal_sweep(problem, decomp, cfg.solver, cfg.sweep)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"sweep_{cfg.solver.method}.csv"
    fileio.write_sweep_csv(path, table)
    finite = [re for _, re in table if math.isfinite(re)]
    print(f"method={cfg.solver.method} lambda_star={lam_star:.6g} best_re={min(finite):.4f}")
    print(f"table: {path}")
    return 0


def _cmd_suite(args):
    cfg = _assemble(args)
    report = run_suite(cfg)
    for row in report.rows:
        tol = "off" if row.tol_lambda is None else f"{row.tol_lambda:g}"
        if row.status == "ok":
            print(
                f"{row.method:2s} {row.selector:16s} tolL={tol:4s} "
                f"re={row.re:.4f} isnr={row.isnr:.2f} iters={row.iterations}"
            )
        else:
            print(f"{row.method:2s} {row.selector:16s} tolL={tol:4s} {row.status}")
    print(f"summary: {report.summary_txt}")
    failed = sum(r.status != "ok" for r in report.rows)
    if failed:
        print(f"{failed} row(s) failed", file=sys.stderr)
        return 2
    return 0


def _cmd_selftest(args):
    import numpy as np

    from iterreg.decompositions import gsvd, spectral_2d
    from iterreg.inner import solve_offset_tikhonov
    from iterreg.operators import (
        BlurSpec1D,
        add_noise_snr,
        build_derivative_1d_zero_bc,
        build_toeplitz_1d,
        gaussian_row,
    )
    from iterreg.selectors import select_gcv

    failures = []

    def check(name, fn):
        try:
            fn()
            print(f"PASS {name}")
        except Exception as e:  # noqa: BLE001 - report and continue
            failures.append(name)
            print(f"FAIL {name}: {e}")

    def gsvd_invariants():
        rng = np.random.default_rng(7)
        for m, n, p in ((20, 15, 14), (18, 15, 20)):
            A = rng.standard_normal((m, n))
            L = rng.standard_normal((p, n))
            dec = gsvd(A, L)
            nt = dec.n_tilde
            assert np.max(np.abs(dec.upsilon[:nt] ** 2 + dec.mu[:nt] ** 2 - 1.0)) < 1e-10
            Ups = np.zeros((m, n))
            Ups[:n, :n] = np.diag(dec.upsilon)
            Mt = np.zeros((p, n))
            k = min(p, n)
            Mt[:k, :k] = np.diag(dec.mu[:k])
            assert np.linalg.norm(A - dec.U @ Ups @ dec.Xinv) / np.linalg.norm(A) < 1e-10
            assert np.linalg.norm(L - dec.V @ Mt @ dec.Xinv) / np.linalg.norm(L) < 1e-10

    def spectral_matches_dense():
        N = 8
        row = gaussian_row(N, 4.0, 5)
        dec = spectral_2d(row, N)
        rng = np.random.default_rng(3)
        x = rng.standard_normal(N * N)
        first_col = np.roll(row[::-1], 1)
        Cz = np.empty((N, N))
        for j in range(N):
            Cz[:, j] = np.roll(first_col, j)
        Adense = np.kron(Cz, Cz)
        assert np.max(np.abs(dec.apply_A(x) - Adense @ x)) < 1e-12

    def inner_matches_normal_eqs():
        rng = np.random.default_rng(11)
        m, n, p = 14, 10, 9
        A = rng.standard_normal((m, n))
        L = rng.standard_normal((p, n))
        b = rng.standard_normal(m)
        h = rng.standard_normal(p)
        lam = 0.7
        dec = gsvd(A, L)
        sol = solve_offset_tikhonov(dec, b, h, lam)
        x_ref = np.linalg.solve(A.T @ A + lam**2 * L.T @ L, A.T @ b + lam**2 * L.T @ h)
        assert np.max(np.abs(sol.x - x_ref)) < 1e-8

    def noise_is_deterministic():
        b = np.ones(64)
        b1, s1 = add_noise_snr(b, 20.0, 5)
        b2, s2 = add_noise_snr(b, 20.0, 5)
        assert np.array_equal(b1, b2) and s1 == s2
        assert abs(np.linalg.norm(b1 - b) - np.linalg.norm(b) / 10.0) < 1e-12

    def gcv_runs_small():
        rng = np.random.default_rng(2)
        spec = BlurSpec1D(n=48, sigma2=6.0, band=12)
        A = build_toeplitz_1d(spec)
        L = build_derivative_1d_zero_bc(48)
        dec = gsvd(A, L)
        b = A @ rng.standard_normal(48)
        out = select_gcv(dec, b, np.zeros(47), SelectorConfig())
        assert out.status in ("converged", "grid-fallback")
        assert 1e-4 <= out.lam <= 1e4

    check("gsvd invariants (two shapes)", gsvd_invariants)
    check("2-D spectral operator matches dense Kronecker (N=8)", spectral_matches_dense)
    check("inner solve matches dense normal equations", inner_matches_normal_eqs)
    check("noise draw deterministic and SNR-exact", noise_is_deterministic)
    check("GCV selection runs on a small problem", gcv_runs_small)
    return 1 if failures else 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="iterreg",
        description="Iteratively reweighted l1 solvers with per-iteration "
        "regularization parameter selection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("run-1d", "run-2d"):
        sp = sub.add_parser(name, help=f"single {name[-2:]} solver run")
        _add_common(sp)
        sp.add_argument("--method", choices=("sb", "mm"), help="outer iteration")
        sp.add_argument("--selector", choices=SELECTOR_NAMES, help="lambda rule")
        sp.add_argument("--tol-lambda", help="freeze tolerance, or 'off'")

    sp = sub.add_parser("sweep", help="fixed-lambda oracle sweep")
    _add_common(sp)
    sp.add_argument("--method", choices=("sb", "mm"))
    sp.add_argument("--problem", choices=("1d", "2d"))

    sp = sub.add_parser("suite", help="full experiment grid")
    _add_common(sp)
    sp.add_argument("--problem", choices=("1d", "2d"))
    sp.add_argument("--tol-lambda", help=argparse.SUPPRESS)

    sub.add_parser("selftest", help="fast internal consistency checks")

    args = parser.parse_args(argv)
    try:
        if args.command == "run-1d":
            return _cmd_run(args, "1d")
        if args.command == "run-2d":
            return _cmd_run(args, "2d")
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "suite":
            return _cmd_suite(args)
        return _cmd_selftest(args)
    except (ValueError, FileNotFoundError, FloatingPointError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
