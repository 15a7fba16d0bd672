import dataclasses
import math

import numpy as np
import pytest

from iterreg import fileio
from iterreg.metrics import IterationTrace
from iterreg.problems import ExperimentConfig, SweepConfig
from iterreg.selectors import SelectorConfig
from iterreg.solvers import SolverConfig


def sample_trace():
    return [
        IterationTrace(
            k=1, lam=232.6, re=0.5, isnr=1.25, rc_x=math.inf, rc_lambda2=math.nan,
            selector_value=3.4e-7, frozen=False, wall_ms=12.5,
        ),
        IterationTrace(
            k=2, lam=230.0, re=0.25, isnr=2.5, rc_x=0.1, rc_lambda2=0.02,
            selector_value=math.nan, frozen=True, wall_ms=11.0,
        ),
    ]


def rows_match(a, b):
    for ra, rb in zip(a, b):
        for f in dataclasses.fields(IterationTrace):
            va, vb = getattr(ra, f.name), getattr(rb, f.name)
            if isinstance(va, float) and math.isnan(va):
                assert math.isnan(vb)
            else:
                assert va == vb
    return True


def test_trace_csv_roundtrip_and_schema(tmp_path):
    path = tmp_path / "t.csv"
    fileio.write_trace_csv(path, sample_trace(), seed=7)
    lines = path.read_text().splitlines()
    assert lines[0] == "# seed=7"
    assert lines[1] == fileio.TRACE_HEADER
    assert fileio.TRACE_HEADER == "k,lambda,re,isnr,rc_x,rc_lambda2,selector_value,frozen,wall_ms"
    seed, rows = fileio.read_trace_csv(path)
    assert seed == 7
    assert len(rows) == 2
    assert rows_match(rows, sample_trace())


def test_trace_csv_rejects_malformed_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("k,lambda\n1,2\n")
    with pytest.raises(ValueError):
        fileio.read_trace_csv(path)


def test_sweep_and_signal_roundtrip(tmp_path):
    table = [(0.1, 0.9), (1.0, 0.5), (10.0, math.nan)]
    p = tmp_path / "s.csv"
    fileio.write_sweep_csv(p, table)
    back = fileio.read_sweep_csv(p)
    assert back[:2] == table[:2]
    assert back[2][0] == 10.0 and math.isnan(back[2][1])

    x = np.array([0.1, -2.5, 3.75])
    p = tmp_path / "x.csv"
    fileio.write_signal_csv(p, x)
    assert np.array_equal(fileio.read_signal_csv(p), x)


def test_pgm_roundtrip_binary(tmp_path):
    img = np.arange(12, dtype=float).reshape(3, 4) / 11.0
    p = tmp_path / "i.pgm"
    fileio.write_pgm(p, img)
    raw = p.read_bytes()
    assert raw.startswith(b"P5\n4 3\n255\n")
    back = fileio.read_pgm(p)
    assert back.dtype == np.uint8
    assert np.array_equal(back, np.round(img * 255).astype(np.uint8))


def test_pgm_reads_ascii_with_comments(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_text("P2\n# a comment\n2 2\n255\n0 64\n128 255\n")
    back = fileio.read_pgm(p)
    assert np.array_equal(back, np.array([[0, 64], [128, 255]], dtype=np.uint8))


def test_pgm_float_values_are_clipped(tmp_path):
    p = tmp_path / "c.pgm"
    fileio.write_pgm(p, np.array([[-0.5, 2.0]]))
    assert np.array_equal(fileio.read_pgm(p), np.array([[0, 255]], dtype=np.uint8))
    with pytest.raises(ValueError):
        fileio.write_pgm(tmp_path / "d.pgm", np.ones(4))


def test_config_roundtrip_covers_nested_sections(tmp_path):
    cfg = ExperimentConfig(
        problem="2d", n=512, snr_db=25.0, seed=3, output_dir="runs",
        solver=SolverConfig(
            method="mm", tau=0.02, epsilon=0.004, tol_x=5e-4,
            tol_lambda=None, max_iter=300, x_init_policy="zero",
            selector=SelectorConfig(kind="dp", nu=1.05, delta=22.6, grid_count=150),
        ),
        sweep=SweepConfig(lo=1.0, hi=100.0, count=31),
    )
    p = tmp_path / "c.ini"
    fileio.save_config(p, cfg)
    assert fileio.load_config(p) == cfg


def test_config_defaults_roundtrip(tmp_path):
    cfg = ExperimentConfig()
    p = tmp_path / "c.ini"
    fileio.save_config(p, cfg)
    back = fileio.load_config(p)
    assert back == cfg
    # experiment runs start from zero unless the file says otherwise
    assert back.solver.x_init_policy == "zero"


def test_summary_outputs(tmp_path):
    from iterreg.suite import ReportRow

    rows = [
        ReportRow("sb", "gcv", None, 0.138, 64.37, 41, 1.5, None, False, "ok"),
        ReportRow("sb", "dp", 0.01, 0.127, 65.06, 35, 1.2, 12, True, "ok"),
    ]
    pc = tmp_path / "summary.csv"
    pt = tmp_path / "summary.txt"
    fileio.write_summary_csv(pc, rows)
    fileio.write_summary_text(pt, rows)
    csv_lines = pc.read_text().splitlines()
    assert csv_lines[0].startswith("method,selector,tol_lambda,re,isnr,iterations")
    assert len(csv_lines) == 3
    txt = pt.read_text()
    assert "gcv" in txt and "dp" in txt
    # boldface stand-in: the best row is flagged
    assert "best" in csv_lines[0]
