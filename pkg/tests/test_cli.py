import os

import pytest

from lpinet.cli import main

CONFIG = """
topology.kind = single_switch
topology.n = 8
workload.kind = phased_hotspot
workload.budget_messages = 160
workload.compute_ns = 200000
policy.kind = fixed_pdt
policy.pdt_ns = 10000
"""

SWEEP = """
sqs = one_q, dbbm
pdt_ns = 0, inf
seed = 3
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_validate_ok(tmp_path, capsys):
    cfg = write(tmp_path, "c.ini", CONFIG)
    assert main(["validate", "--config", cfg]) == 0
    assert "config OK" in capsys.readouterr().out


def test_validate_bad_config_exit_1(tmp_path, capsys):
    cfg = write(tmp_path, "c.ini", CONFIG + "fabric.nvc = 0\n")
    assert main(["validate", "--config", cfg]) == 1
    assert "fabric.nvc" in capsys.readouterr().err


def test_run_single_with_auto_baseline(tmp_path, capsys):
    cfg = write(tmp_path, "c.ini", CONFIG)
    out = str(tmp_path / "out")
    assert main(["run", "--config", cfg, "--out", out]) == 0
    csv = (tmp_path / "out" / "results.csv").read_text().splitlines()
    assert len(csv) == 3  # header + baseline + run


def test_run_sweep_counts_and_baselines(tmp_path):
    cfg = write(tmp_path, "c.ini", CONFIG)
    sweep = write(tmp_path, "s.ini", SWEEP)
    out = str(tmp_path / "out")
    assert main(["run", "--config", cfg, "--sweep", sweep, "--out", out]) == 0
    lines = (tmp_path / "out" / "results.csv").read_text().splitlines()
    # 2 sqs x 2 pdt dependents + 2 baselines
    assert len(lines) == 1 + 6


def test_workers_do_not_change_bytes(tmp_path):
    cfg = write(tmp_path, "c.ini", CONFIG)
    sweep = write(tmp_path, "s.ini", SWEEP)
    out1, out2 = str(tmp_path / "w1"), str(tmp_path / "w2")
    assert main(["run", "--config", cfg, "--sweep", sweep, "--out", out1,
                 "--workers", "1"]) == 0
    assert main(["run", "--config", cfg, "--sweep", sweep, "--out", out2,
                 "--workers", "2"]) == 0
    a = (tmp_path / "w1" / "results.csv").read_bytes()
    b = (tmp_path / "w2" / "results.csv").read_bytes()
    assert a == b


def test_failing_run_marks_row_and_exits_2(tmp_path, capsys):
    # trace file disappears before the run starts: per-run failure, not a crash
    trace = tmp_path / "gone.txt"
    trace.write_text("0 0 1 1500\n")
    cfg = write(tmp_path, "c.ini",
                "topology.kind = single_switch\ntopology.n = 4\n"
                "workload.kind = trace\n"
                f"workload.trace_path = {trace}\n")
    trace.unlink()
    out = str(tmp_path / "out")
    assert main(["run", "--config", cfg, "--out", out]) == 2
    rows = (tmp_path / "out" / "results.csv").read_text().splitlines()[1:]
    assert any(row.endswith(",failed") for row in rows)


def test_env_var_out_dir(tmp_path, monkeypatch):
    cfg = write(tmp_path, "c.ini", CONFIG)
    monkeypatch.setenv("LPINET_OUT", str(tmp_path / "envout"))
    assert main(["run", "--config", cfg]) == 0
    assert (tmp_path / "envout" / "results.csv").exists()


def test_seed_override_changes_runs(tmp_path):
    cfg = write(tmp_path, "c.ini", CONFIG)
    outa, outb = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["run", "--config", cfg, "--out", outa, "--seed", "5"]) == 0
    assert main(["run", "--config", cfg, "--out", outb, "--seed", "6"]) == 0
    a = (tmp_path / "a" / "results.csv").read_text()
    b = (tmp_path / "b" / "results.csv").read_text()
    assert a != b
    assert "_s5_" in a and "_s6_" in b


def test_missing_config_file_exit_1(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.ini")]) == 1
    assert "config error" in capsys.readouterr().err
