"""Serialization: iteration-trace CSV (schema frozen below), single-column
signal CSV, binary/ASCII portable graymaps, run summaries, and the flat
sectioned config format. All writers go through an atomic replace so a
crashed run never leaves a truncated file."""

import configparser
import csv
import math
import os

import numpy as np

from iterreg.metrics import IterationTrace

TRACE_HEADER = "k,lambda,re,isnr,rc_x,rc_lambda2,selector_value,frozen,wall_ms"


def _atomic_write(path, data):
    tmp = f"{path}.tmp"
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(tmp, mode) as f:
        f.write(data)
    os.replace(tmp, path)


def _fmt(v):
    """Shortest round-trip decimal form; keeps inf/nan readable."""
    return repr(float(v))


def write_trace_csv(path, trace, seed):
    lines = [f"# seed={seed}", TRACE_HEADER]
    for r in trace:
        lines.append(
            ",".join(
                [
                    str(r.k),
                    _fmt(r.lam),
                    _fmt(r.re),
                    _fmt(r.isnr),
                    _fmt(r.rc_x),
                    _fmt(r.rc_lambda2),
                    _fmt(r.selector_value),
                    "true" if r.frozen else "false",
                    _fmt(r.wall_ms),
                ]
            )
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def read_trace_csv(path):
    """Returns (seed, rows). The seed line and header are validated."""
    with open(path) as f:
        first = f.readline().strip()
        if not first.startswith("# seed="):
            raise ValueError(f"missing seed line in {path}")
        seed = int(first.split("=", 1)[1])
        header = f.readline().strip()
        if header != TRACE_HEADER:
            raise ValueError(f"unexpected trace header: {header}")
        rows = []
        for rec in csv.reader(f):
            if not rec:
                continue
            rows.append(
                IterationTrace(
                    k=int(rec[0]),
                    lam=float(rec[1]),
                    re=float(rec[2]),
                    isnr=float(rec[3]),
                    rc_x=float(rec[4]),
                    rc_lambda2=float(rec[5]),
                    selector_value=float(rec[6]),
                    frozen=rec[7] == "true",
                    wall_ms=float(rec[8]),
                )
            )
    return seed, rows


def write_signal_csv(path, x):
    x = np.asarray(x, dtype=float).ravel()
    _atomic_write(path, "\n".join(_fmt(v) for v in x) + "\n")


def read_signal_csv(path):
    with open(path) as f:
        vals = [float(line) for line in f if line.strip()]
    return np.array(vals)


def write_pgm(path, img):
    """P5 graymap. Float input is treated as [0, 1] intensities and scaled
    to 8 bits; integer input must already lie in [0, 255]."""
    a = np.asarray(img)
    if a.ndim != 2:
        raise ValueError("graymap input must be 2-D")
    if a.dtype.kind == "f":
        a = np.clip(np.rint(a * 255.0), 0.0, 255.0).astype(np.uint8)
    else:
        if a.min() < 0 or a.max() > 255:
            raise ValueError("integer graymap values must lie in [0, 255]")
        a = a.astype(np.uint8)
    h, w = a.shape
    _atomic_write(path, f"P5\n{w} {h}\n255\n".encode("ascii") + a.tobytes())


def read_pgm(path):
    """Reads binary (P5) or ASCII (P2) graymaps with maxval up to 255,
    skipping # comments in the header. Returns a uint8 array."""
    with open(path, "rb") as f:
        data = f.read()
    pos = 0

    def token():
        nonlocal pos
        while pos < len(data):
            if data[pos : pos + 1].isspace():
                pos += 1
            elif data[pos : pos + 1] == b"#":
                while pos < len(data) and data[pos : pos + 1] != b"\n":
                    pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        return data[start:pos]

    magic = token()
    if magic not in (b"P5", b"P2"):
        raise ValueError(f"unsupported graymap magic: {magic!r}")
    w = int(token())
    h = int(token())
    maxval = int(token())
    if not 0 < maxval <= 255:
        raise ValueError(f"unsupported maxval: {maxval}")
    if magic == b"P5":
        pos += 1  # single whitespace byte separates header and raster
        raster = data[pos : pos + w * h]
        if len(raster) != w * h:
            raise ValueError("truncated graymap raster")
        a = np.frombuffer(raster, dtype=np.uint8).reshape(h, w)
    else:
        vals = data[pos:].split()
        if len(vals) != w * h:
            raise ValueError("ASCII graymap value count mismatch")
        a = np.array([int(v) for v in vals], dtype=np.uint8).reshape(h, w)
    return a.copy()


def write_sweep_csv(path, table):
    """(lambda, re) pairs from the fixed-lambda oracle sweep."""
    lines = ["lambda,re"] + [f"{_fmt(lam)},{_fmt(re)}" for lam, re in table]
    _atomic_write(path, "\n".join(lines) + "\n")


def read_sweep_csv(path):
    with open(path) as f:
        header = f.readline().strip()
        if header != "lambda,re":
            raise ValueError(f"unexpected sweep header: {header}")
        pairs = [tuple(float(v) for v in line.split(",")) for line in f if line.strip()]
    return pairs


SUMMARY_HEADER = (
    "method,selector,tol_lambda,re,isnr,iterations,wall_s,frozen_at,best,status"
)


def _tol_tag(tol):
    return "off" if tol is None else _fmt(tol)


def write_summary_csv(path, rows):
    lines = [SUMMARY_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.method,
                    r.selector,
                    _tol_tag(r.tol_lambda),
                    _fmt(r.re),
                    _fmt(r.isnr),
                    str(r.iterations),
                    _fmt(r.wall_s),
                    "" if r.frozen_at is None else str(r.frozen_at),
                    "true" if r.best else "false",
                    r.status,
                ]
            )
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def write_summary_text(path, rows):
    cols = ["method", "selector", "tol_lambda", "RE", "ISNR", "iter", "wall_s", "frozen", "best"]
    table = [cols]
    for r in rows:
        table.append(
            [
                r.method,
                r.selector,
                _tol_tag(r.tol_lambda),
                f"{r.re:.3f}" if math.isfinite(r.re) else str(r.re),
                f"{r.isnr:.2f}" if math.isfinite(r.isnr) else str(r.isnr),
                str(r.iterations),
                f"{r.wall_s:.2f}",
                "" if r.frozen_at is None else str(r.frozen_at),
                "*" if r.best else "",
            ]
        )
    widths = [max(len(row[j]) for row in table) for j in range(len(cols))]
    lines = ["  ".join(row[j].ljust(widths[j]) for j in range(len(cols))).rstrip() for row in table]
    lines.insert(1, "  ".join("-" * w for w in widths))
    _atomic_write(path, "\n".join(lines) + "\n")


def save_config(path, cfg):
    """Writes the resolved experiment config in the sectioned key=value
    format accepted by load_config."""
    cp = configparser.ConfigParser()
    cp["experiment"] = {
        "problem": cfg.problem,
        "n": str(cfg.n),
        "snr_db": _fmt(cfg.snr_db),
        "seed": str(cfg.seed),
        "output_dir": cfg.output_dir,
        "image": cfg.image,
    }
    if cfg.sigma2 is not None:
        cp["experiment"]["sigma2"] = _fmt(cfg.sigma2)
    if cfg.band is not None:
        cp["experiment"]["band"] = str(cfg.band)
    s = cfg.solver
    cp["solver"] = {
        "method": s.method,
        "tol_x": _fmt(s.tol_x),
        "tol_lambda": "off" if s.tol_lambda is None else _fmt(s.tol_lambda),
        "max_iter": str(s.max_iter),
        "x_init_policy": s.x_init_policy,
    }
    if s.tau is not None:
        cp["solver"]["tau"] = _fmt(s.tau)
    if s.epsilon is not None:
        cp["solver"]["epsilon"] = _fmt(s.epsilon)
    sel = s.selector
    if hasattr(sel, "kind"):
        cp["selector"] = {
            "kind": sel.kind,
            "alpha": _fmt(sel.alpha),
            "nu": _fmt(sel.nu),
            "grid_lo": _fmt(sel.grid_lo),
            "grid_hi": _fmt(sel.grid_hi),
            "grid_count": str(sel.grid_count),
            "newton_tol": _fmt(sel.newton_tol),
            "newton_max_iter": str(sel.newton_max_iter),
        }
        if sel.delta is not None:
            cp["selector"]["delta"] = _fmt(sel.delta)
    else:
        cp["selector"] = {"kind": "fixed", "lam": _fmt(sel.lam)}
    cp["sweep"] = {
        "lo": _fmt(cfg.sweep.lo),
        "hi": _fmt(cfg.sweep.hi),
        "count": str(cfg.sweep.count),
    }
    tmp = f"{path}.tmp"
    with open(tmp, "w") as f:
        cp.write(f)
    os.replace(tmp, path)


def load_config(path):
    """Reads the sectioned key=value format; absent keys keep defaults."""
    from iterreg.problems import ExperimentConfig, SweepConfig
    from iterreg.selectors import FixedLambda, SelectorConfig
    from iterreg.solvers import SolverConfig

    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise FileNotFoundError(path)

    sel = SelectorConfig()
    if cp.has_section("selector"):
        sec = cp["selector"]
        if sec.get("kind") == "fixed":
            sel = FixedLambda(lam=sec.getfloat("lam"))
        else:
            sel = SelectorConfig(
                kind=sec.get("kind", sel.kind),
                alpha=sec.getfloat("alpha", sel.alpha),
                nu=sec.getfloat("nu", sel.nu),
                delta=sec.getfloat("delta") if sec.get("delta") is not None else None,
                grid_lo=sec.getfloat("grid_lo", sel.grid_lo),
                grid_hi=sec.getfloat("grid_hi", sel.grid_hi),
                grid_count=sec.getint("grid_count", sel.grid_count),
                newton_tol=sec.getfloat("newton_tol", sel.newton_tol),
                newton_max_iter=sec.getint("newton_max_iter", sel.newton_max_iter),
            )

    # Experiment runs default to the zero start (see ExperimentConfig).
    solver = SolverConfig(selector=sel, x_init_policy="zero")
    if cp.has_section("solver"):
        sec = cp["solver"]
        tol_raw = sec.get("tol_lambda", "0.01")
        solver = SolverConfig(
            method=sec.get("method", solver.method),
            tau=sec.getfloat("tau") if sec.get("tau") is not None else None,
            epsilon=sec.getfloat("epsilon") if sec.get("epsilon") is not None else None,
            selector=sel,
            tol_x=sec.getfloat("tol_x", solver.tol_x),
            tol_lambda=None if tol_raw == "off" else float(tol_raw),
            max_iter=sec.getint("max_iter", solver.max_iter),
            x_init_policy=sec.get("x_init_policy", solver.x_init_policy),
        )

    sweep = SweepConfig()
    if cp.has_section("sweep"):
        sec = cp["sweep"]
        sweep = SweepConfig(
            lo=sec.getfloat("lo", sweep.lo),
            hi=sec.getfloat("hi", sweep.hi),
            count=sec.getint("count", sweep.count),
        )

    cfg = ExperimentConfig(solver=solver, sweep=sweep)
    if cp.has_section("experiment"):
        sec = cp["experiment"]
        cfg = ExperimentConfig(
            problem=sec.get("problem", cfg.problem),
            n=sec.getint("n", cfg.n),
            sigma2=sec.getfloat("sigma2") if sec.get("sigma2") is not None else None,
            band=sec.getint("band") if sec.get("band") is not None else None,
            snr_db=math.inf if sec.get("snr_db") == "inf" else sec.getfloat("snr_db", cfg.snr_db),
            seed=sec.getint("seed", cfg.seed),
            solver=solver,
            sweep=sweep,
            output_dir=sec.get("output_dir", cfg.output_dir),
            image=sec.get("image", cfg.image),
        )
    return cfg
