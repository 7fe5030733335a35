import shutil
import subprocess
import sys

import numpy as np
import pytest

from ventcel import cli, fileio
from ventcel.analysis import ConvergenceReport, convergence_rates
from ventcel.config import dump_config, parse_config, preset
from ventcel.errors import ConfigError

PRISM_CFG = """\
# reentrant prism, case I
[domain]
polygon = [(0,0), (0.5,0.5), (1,0), (1,1), (0,1)]
height = 1
ventcel_face = bottom

[grading]
mu = {mu}
nu = 1.0

[study]
k_min = 2
k_max = {kmax}
data = {data}
out = {out}
"""

SQUARE_CFG = """\
[domain]
polygon = [(0,0), (1,0), (1,1), (0,1)]
ventcel_face = bottom
[grading]
mu = 1.0
"""


def _cfg(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _prism(tmp_path, mu=0.58, kmax=4, data="const1", **extra):
    text = PRISM_CFG.format(mu=mu, kmax=kmax, data=data, out=tmp_path / "out")
    for section, body in extra.items():
        text += f"\n[{section}]\n{body}\n"
    return _cfg(tmp_path, text)


def test_check_graded_prism_passes(capsys):
    assert cli.main(["check", "--preset", "prism-case-1"]) == 0
    assert "all conditions pass" in capsys.readouterr().out


def test_check_uniform_fails_edge_condition(capsys):
    assert cli.main(["check", "--preset", "prism-case-1", "--mu", "1.0"]) == 3
    out = capsys.readouterr().out
    assert "FAILED conditions: 5.2" in out


def test_check_square_prism_vacuous(tmp_path):
    assert cli.main(["check", "--config", _cfg(tmp_path, SQUARE_CFG)]) == 0


def test_config_error_reports_line(tmp_path, capsys):
    text = SQUARE_CFG + "colour = red\n"
    assert cli.main(["check", "--config", _cfg(tmp_path, text)]) == 2
    err = capsys.readouterr().err
    assert ":6:" in err and "grading.colour" in err


def test_config_bad_value_reports_field(tmp_path, capsys):
    text = SQUARE_CFG.replace("mu = 1.0", "mu = fast")
    assert cli.main(["check", "--config", _cfg(tmp_path, text)]) == 2
    assert "grading.mu" in capsys.readouterr().err


@pytest.mark.parametrize("bad", ["mu = 1.5", "mu = 0"])
def test_config_mu_range(tmp_path, bad):
    assert cli.main(["check", "--config", _cfg(tmp_path, SQUARE_CFG.replace("mu = 1.0", bad))]) == 2


def test_config_invalid_polygon(tmp_path):
    text = SQUARE_CFG.replace("[(0,0), (1,0), (1,1), (0,1)]", "[(0,0), (1,1), (1,0), (0,1)]")
    assert cli.main(["check", "--config", _cfg(tmp_path, text)]) == 2


def test_missing_source_and_unknown_preset():
    assert cli.main(["check"]) == 2
    assert cli.main(["check", "--preset", "nope"]) == 2


def test_level_guard(tmp_path):
    out = str(tmp_path)
    assert cli.main(["mesh", "--preset", "cube", "--level", "9", "--out", out]) == 2
    assert cli.main(["mesh", "--preset", "cube", "--level", "0", "--out", out]) == 2


def test_study_guard(tmp_path):
    assert cli.main(["study", "--config", _prism(tmp_path, kmax=9)]) == 2
    assert cli.main(["study", "--config", _prism(tmp_path, kmax=3)]) == 2       # too few levels


def test_mesh_cube_level1(tmp_path, capsys):
    out = tmp_path / "o"
    assert cli.main(["mesh", "--preset", "cube", "--level", "1", "--out", str(out)]) == 0
    assert "N_tets=48" in capsys.readouterr().out
    for name in ("mesh_k1.txt", "mesh_k1.vtk", "sizes_k1.csv"):
        assert (out / name).exists()
    assert fileio.read_mesh_text(out / "mesh_k1.txt", "bottom").n_tets == 48


def test_mesh_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert cli.main(["mesh", "--preset", "prism-case-1", "--level", "2", "--out", str(d)]) == 0
    for name in ("mesh_k2.txt", "mesh_k2.vtk", "sizes_k2.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_mesh_count_scaling(tmp_path):
    n = {}
    for k in (2, 3):
        d = tmp_path / str(k)
        cli.main(["mesh", "--preset", "prism-case-1", "--mu", "1.0", "--level", str(k),
                  "--out", str(d)])
        n[k] = fileio.read_mesh_text(d / f"mesh_k{k}.txt", "bottom").n_tets * 2.0 ** (-3 * k)
    assert 0.25 <= n[3] / n[2] <= 4


def test_mesh_grading_failure_exit4(tmp_path):
    text = PRISM_CFG.format(mu=0.58, kmax=4, data="const1", out=tmp_path / "o")
    text = text.replace("nu = 1.0", "nu = 1.0\nR0 = 0.9")
    assert cli.main(["mesh", "--config", _cfg(tmp_path, text), "--level", "2"]) == 4


def test_solve_zero_data(tmp_path, capsys):
    path = _prism(tmp_path, data="zero")
    assert cli.main(["solve", "--config", path, "--level", "2"]) == 0
    assert "max|u|=0.000000e+00" in capsys.readouterr().out
    u = fileio.read_vector(tmp_path / "out" / "u_k2.txt")
    assert np.all(u == 0)
    assert (tmp_path / "out" / "u_k2.vtk").exists()


def test_solve_prism_residual(tmp_path, capsys):
    assert cli.main(["solve", "--config", _prism(tmp_path), "--level", "3"]) == 0
    line = capsys.readouterr().out
    res = float(line.split("residual=")[1].split()[0])
    assert res <= 1e-10


def test_solve_manufactured_error_decreases(tmp_path, capsys):
    errs = []
    for k in (2, 3):
        assert cli.main(["solve", "--preset", "cube", "--level", str(k),
                         "--out", str(tmp_path)]) == 0
        errs.append(float(capsys.readouterr().out.split("vnorm_error=")[1].split()[0]))
    assert np.isfinite(errs).all() and errs[1] < errs[0]


def test_solve_failure_exit5(tmp_path, capsys):
    path = _prism(tmp_path, solver="max_iter = 2")
    assert cli.main(["solve", "--config", path, "--level", "2"]) == 5
    assert "residual" in capsys.readouterr().err


def test_study_csv_matches_printed_rates(tmp_path, capsys):
    path = _prism(tmp_path, kmax=4)
    assert cli.main(["study", "--config", path]) == 0
    printed = capsys.readouterr().out
    csv_text = (tmp_path / "out" / "study.csv").read_text()
    rep = ConvergenceReport.from_csv(csv_text)
    assert convergence_rates(rep.values) == rep.rates
    shown = [float(line.split()[-1]) for line in printed.splitlines()[2:]
             if len(line.split()) == 5]
    assert shown == [round(r, 3) for r in rep.rates]
    assert len(rep.rates) == 1


def test_study_reproducible_bytes(tmp_path):
    texts = []
    for name in ("a", "b"):
        d = tmp_path / name
        d.mkdir()
        path = _prism(d, kmax=4)
        assert cli.main(["study", "--config", path]) == 0
        texts.append((d / "out" / "study.csv").read_bytes())
    assert texts[0] == texts[1]


def test_study_flushes_partial_results(tmp_path):
    # the level-4 solve needs about 95 iterations, levels 2 and 3 fewer than 60
    path = _prism(tmp_path, kmax=4, solver="max_iter = 60")
    assert cli.main(["study", "--config", path]) == 5
    rep = ConvergenceReport.from_csv((tmp_path / "out" / "study.csv").read_text())
    assert [r.h for r in rep.records] == [0.25, 0.125]


def test_study_warns_when_inadmissible(tmp_path, capsys):
    assert cli.main(["study", "--config", _prism(tmp_path, mu=1.0, kmax=4)]) == 0
    assert "warning" in capsys.readouterr().err


def test_study_manufactured_exact_errors(tmp_path):
    text = SQUARE_CFG + f"[study]\nk_min = 1\nk_max = 3\ndata = manufactured_cube\nout = {tmp_path}\n"
    assert cli.main(["study", "--config", _cfg(tmp_path, text)]) == 0
    rep = ConvergenceReport.from_csv((tmp_path / "study.csv").read_text(), "vnorm_error_exact")
    assert len(rep.rates) == 2 and all(v is not None for v in rep.values)


def test_config_round_trip():
    cfg = preset("prism-case-2")
    cfg.mu = {1: 0.5}
    cfg.lambda_v = {1: 0.4}
    cfg.R0 = 0.2
    back = parse_config(dump_config(cfg))
    assert back == cfg


def test_parse_config_requires_polygon():
    with pytest.raises(ConfigError):
        parse_config("[grading]\nmu = 0.5\n")


@pytest.mark.skipif(shutil.which("ventcel") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["ventcel", "check", "--preset", "prism-case-2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ventcel.cli", "check", "--preset",
                           "prism-case-1", "--mu", "0.76"], capture_output=True, text=True)
    assert proc.returncode == 3
