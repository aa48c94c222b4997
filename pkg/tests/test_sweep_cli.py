"""Batch sweeps (grid order, checkpoint/resume, CSV shape) and the
command-line interface (exit codes, config merging, file outputs)."""

import json
import os

import numpy as np
import pytest

from qpfdyn import cli
from qpfdyn.sweep import (
    CSV_HEADER,
    Axis,
    SweepSpec,
    evaluate_cell,
    fmt,
    run_sweep,
    write_sweep_csv,
)


@pytest.fixture(autouse=True)
def _single_thread(monkeypatch):
    monkeypatch.setenv("QPFDYN_THREADS", "1")


# ---------------------------------------------------------------------------
# sweep plumbing


def test_fmt_round_trips():
    for x in (0.1, 1.0 / 3.0, 1e-17, -2.5e300, 0.0):
        assert float(fmt(x)) == x


def test_axis_values_and_guards():
    lin = Axis("a", 0.0, 1.0, 5).values()
    assert np.allclose(lin, [0.0, 0.25, 0.5, 0.75, 1.0])
    log = Axis("a", 1.0, 100.0, 3, scale="log").values()
    assert np.allclose(log, [1.0, 10.0, 100.0])
    with pytest.raises(ValueError):
        Axis("a", 0.0, 1.0, 0).values()
    with pytest.raises(ValueError):
        Axis("a", 0.0, 1.0, 2, scale="cubic").values()


def _spec(tmp_path, counts=(3, 2), **kw):
    axes = [Axis("tau", 0.0, 0.5, counts[0])]
    if len(counts) > 1:
        axes.append(Axis("b", 0.0, 0.0, counts[1]))
    base = dict(family="arnold", fixed={"a": 0.0}, axes=tuple(axes),
                observables=("rho",), n_rho=10000,
                output=str(tmp_path / "out.csv"))
    base.update(kw)
    return SweepSpec(**base)


def test_spec_validation(tmp_path):
    with pytest.raises(ValueError):
        _spec(tmp_path, axes=())
    with pytest.raises(ValueError):
        _spec(tmp_path, observables=())
    with pytest.raises(ValueError):
        _spec(tmp_path, observables=("rho", "entropy"))
    with pytest.raises(ValueError):
        _spec(tmp_path, n_rho=0)


def test_grid_row_major_order(tmp_path):
    spec = _spec(tmp_path, counts=(3, 2))
    grid = spec.grid()
    taus = [c[0] for c in grid]
    assert taus == [0.0, 0.0, 0.25, 0.25, 0.5, 0.5]
    assert len(grid) == 6


def test_spec_key_changes_with_spec(tmp_path):
    a = _spec(tmp_path)
    b = _spec(tmp_path, n_rho=20000)
    assert a.key() != b.key()
    assert a.key() == _spec(tmp_path).key()


def test_evaluate_cell_error_flag(tmp_path):
    spec = _spec(tmp_path, family="no-such-family")
    res = evaluate_cell(spec, 0, (0.25, 0.0))
    assert res.flags.startswith("error:")
    assert res.values == {}


# ---------------------------------------------------------------------------
# rigid sweep: the rotation number of the unperturbed family equals the
# translation parameter


def test_rigid_sweep_rho_equals_tau(tmp_path):
    spec = _spec(tmp_path, counts=(5,))
    assert write_sweep_csv(spec, checkpoint=False)
    lines = open(spec.output).read().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 6
    for line, tau in zip(lines[1:], np.linspace(0.0, 0.5, 5)):
        cells = line.split(",")
        assert float(cells[0]) == pytest.approx(tau)
        rho = float(cells[3])
        assert rho == pytest.approx(tau, abs=2e-4)
        assert cells[8] == ""  # no flags


def test_checkpoint_resume_byte_identical(tmp_path):
    spec = _spec(tmp_path, counts=(4,))
    # interrupted run: only 2 cells, no CSV yet
    assert not write_sweep_csv(spec, max_cells=2)
    assert not os.path.exists(spec.output)
    ckpt = spec.output + ".ckpt.json"
    assert os.path.exists(ckpt)
    partial = json.load(open(ckpt))
    assert len(partial["rows"]) == 2
    # resume to completion
    assert write_sweep_csv(spec)
    first = open(spec.output, "rb").read()
    # rows finished before the interruption came from the checkpoint
    final = json.load(open(ckpt))
    for k, row in partial["rows"].items():
        assert final["rows"][k] == row
    # a rerun with the full checkpoint reproduces the file byte for byte
    os.remove(spec.output)
    assert write_sweep_csv(spec)
    assert open(spec.output, "rb").read() == first


def test_checkpoint_invalidated_by_spec_change(tmp_path):
    spec = _spec(tmp_path, counts=(2,))
    assert write_sweep_csv(spec)
    changed = _spec(tmp_path, counts=(2,), n_rho=20000)
    rows = json.load(open(spec.output + ".ckpt.json"))
    assert rows["key"] == spec.key() != changed.key()
    # run_sweep with the changed spec ignores the stale checkpoint
    lines = list(run_sweep(changed, max_cells=1))
    assert lines == [CSV_HEADER]


# ---------------------------------------------------------------------------
# command-line interface


def test_cli_rotnum_rigid(capsys):
    code = cli.main(["rotnum", "--a", "0", "--tau", "0.25", "--n", "1e4"])
    out = capsys.readouterr().out
    assert code == 0
    rho = float(out.split("=")[1].split()[0])
    assert rho == pytest.approx(0.25, abs=2e-4)


def test_cli_usage_errors(capsys):
    assert cli.main(["no-such-command"]) == 1
    assert cli.main(["sweep"]) == 1
    assert cli.main(["rotnum", "--n", "not-a-number"]) == 1
    capsys.readouterr()


def test_cli_lyap_runs(capsys):
    code = cli.main(["lyap", "--a", "0.1", "--tau", "0.1", "--n", "1e4"])
    out = capsys.readouterr().out
    assert code == 0
    assert "lambda_fwd" in out and "lambda_bwd" in out


def test_cli_attractor_csv(tmp_path, capsys):
    out = tmp_path / "att.csv"
    code = cli.main(["attractor", "--a", "0.1", "--tau", "0.1",
                     "--transient", "100", "--keep", "50",
                     "--out", str(out)])
    capsys.readouterr()
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "theta,x"
    assert len(lines) == 51
    th0, x0 = map(float, lines[1].split(","))
    assert 0.0 <= th0 < 1.0 and 0.0 <= x0 < 1.0


def test_cli_exclude_json(capsys):
    code = cli.main(["exclude", "--N", "2,8", "--K", "16,8",
                     "--eps", "1e-3,3e-4", "--depth", "0"])
    out = capsys.readouterr().out
    assert code == 0
    sets = json.loads(out)
    assert len(sets) == 1
    assert sets[0]["level"] == 0
    assert 0.0 < sets[0]["measure"] < 1.0


def test_cli_config_merge(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[rotnum]\ntau = 0.125\nn = 1e4\n")
    code = cli.main(["--config", str(cfg), "rotnum", "--a", "0"])
    out = capsys.readouterr().out
    assert code == 0
    assert float(out.split("=")[1].split()[0]) == pytest.approx(0.125,
                                                                abs=2e-4)
    # explicit flags win over the config file
    code = cli.main(["--config", str(cfg), "rotnum", "--a", "0",
                     "--tau", "0.375"])
    out = capsys.readouterr().out
    assert float(out.split("=")[1].split()[0]) == pytest.approx(0.375,
                                                                abs=2e-4)


def test_cli_sweep_from_config(tmp_path, capsys):
    out = tmp_path / "grid.csv"
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(
        "[sweep]\n"
        "family = arnold\n"
        "a = 0.0\n"
        "axis1 = tau\naxis1_lo = 0.0\naxis1_hi = 0.5\naxis1_count = 3\n"
        "observables = rho\n"
        "n_rho = 10000\n"
        f"output = {out}\n")
    code = cli.main(["sweep", "--config", str(cfg)])
    msg = capsys.readouterr().out
    assert code == 0
    assert "complete" in msg
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER and len(lines) == 4
    assert float(lines[2].split(",")[3]) == pytest.approx(0.25, abs=2e-4)
