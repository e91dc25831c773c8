import os
import subprocess

import numpy as np
import pytest

import cpdtensor as cpd

CLI = os.environ.get("CPD_CLI")
pytestmark = pytest.mark.skipif(not CLI, reason="CPD_CLI not set")


def run(*args):
    return subprocess.run([CLI, *args], capture_output=True, text=True)


def test_generate_decompose_reconstruct(tmp_path):
    y = tmp_path / "y.cpdt"
    truth = tmp_path / "truth"
    model = tmp_path / "model"
    back = tmp_path / "back.cpdt"
    assert run("generate", "--dims", "8x7x6", "--rank", "2", "--seed", "4", "--out", str(y), "--truth", str(truth)).returncode == 0
    r = run("decompose", "--input", str(y), "--method", "als-tasd", "--rank", "2", "--out", str(model))
    assert r.returncode == 0, r.stderr
    assert "converged=1" in r.stdout
    assert run("reconstruct", "--model", str(model), "--out", str(back)).returncode == 0
    np.testing.assert_allclose(cpd.read_cpdt(str(back)), cpd.read_cpdt(str(y)), atol=1e-10)
    est = [cpd.read_cpdt(str(model / f"factor_{k}.cpdt")) for k in range(3)]
    ref = [cpd.read_cpdt(str(truth / f"factor_{k}.cpdt")) for k in range(3)]
    assert cpd.loss_matched(est, ref) < 1e-8


def test_exit_codes(tmp_path):
    assert run("decompose", "--input", str(tmp_path / "missing.cpdt"), "--rank", "1", "--out", str(tmp_path / "m")).returncode == 1
    zero = tmp_path / "zero.cpdt"
    cpd.write_cpdt(str(zero), np.zeros((3, 3, 3)))
    assert run("decompose", "--input", str(zero), "--method", "r1-als", "--rank", "1", "--out", str(tmp_path / "m")).returncode == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("dims = 3x3x3\nranks = x\n")
    r = run("simulate", "--config", str(bad), "--out", str(tmp_path / "r.csv"))
    assert r.returncode == 2
    assert "config line 2" in r.stderr


def test_simulate_jobs_identical(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("dims = 6x5x4\nranks = 2\nsigmas = 0.01\nmethods = als-tasd, simdiag\nreplicates = 4\nseed = 1\n")
    outs = []
    for jobs in ("1", "8"):
        out = tmp_path / f"r{jobs}.csv"
        assert run("simulate", "--config", str(cfg), "--out", str(out), "--jobs", jobs).returncode == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].decode().splitlines()[0] == cpd.csv_header


def test_sweep_alpha_sigma(tmp_path):
    cfg = tmp_path / "a.cfg"
    cfg.write_text("dims = 30x30x30\nranks = 1\nalphas = 1\nmethods = tasd\n")
    out = tmp_path / "a.csv"
    assert run("sweep-alpha", "--config", str(cfg), "--out", str(out)).returncode == 0
    row = out.read_text().splitlines()[1].split(",")
    assert float(row[6]) == pytest.approx(1 / 3, rel=1e-15)
    assert row[8] == "1"
