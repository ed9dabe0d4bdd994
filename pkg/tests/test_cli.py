import json
import subprocess
import sys

import numpy as np
import pytest

from attack_sim.cli import main
from attack_sim.harness import scenario
from attack_sim.mcs import Modulation
from attack_sim.pseudorange import intercept
from attack_sim.waveform import write_iqf


def test_ring_command(capsys):
    assert main(["ring", "--modulation", "bpsk", "--scenario", "a"]) == 0
    lines = capsys.readouterr().out.split()
    assert lines[0] == "inner_m" and float(lines[1]) == pytest.approx(1894.09, abs=0.01)
    assert lines[2] == "outer_m" and float(lines[3]) == pytest.approx(2675.47, abs=0.01)


def test_ring_empty_region_exit_code(tmp_path, capsys):
    cfg = tmp_path / "small.cfg"
    cfg.write_text("frequency_hz = 5e9\ncell_radius_m = 1000\n")
    assert main(["ring", "--modulation", "bpsk", "--scenario", str(cfg)]) == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_scenario_exit_code(tmp_path):
    assert main(["run", "--scenario", "zz", "--trials", "1", "--out-dir", str(tmp_path)]) == 2


def test_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", "--scenario", "g", "--variant", "multi-ue", "--trials", "3", "--seed", "4",
                 "--out-dir", str(out)]) == 0
    assert "UE1: accuracy" in capsys.readouterr().out
    assert (out / "trials.csv").exists() and (out / "traces" / "trial_0.json").exists()
    assert json.loads((out / "summary.json").read_text())["variant"] == "multi_ue"


def test_run_partial_exit_code(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", "--scenario", "d", "--trials", "1", "--out-dir", str(blocker / "sub")]) == 3


def test_compare_command(tmp_path, capsys):
    assert main(["compare", "--scenario", "d", "--trials", "3", "--out-dir", str(tmp_path)]) == 0
    result = json.loads(capsys.readouterr().out)
    assert {"ula_over_single", "multi_ue_over_single"} <= set(result)


def test_classify_command(tmp_path):
    sc = scenario("a")
    rng = np.random.default_rng(0)
    for k, mod in enumerate(Modulation):
        write_iqf(tmp_path / f"frame{k}.iqf", intercept(mod, 30.0, sc, 4096, rng))
    out = tmp_path / "labels.csv"
    assert main(["classify", "--frames", str(tmp_path / "*.iqf"), "--out", str(out)]) == 0
    rows = [line.split(",") for line in out.read_text().strip().split("\n")[1:]]
    assert [r[1] for r in rows] == [r[2] for r in rows] == [m.label for m in Modulation]


def test_classify_no_match(tmp_path):
    assert main(["classify", "--frames", str(tmp_path / "*.iqf"), "--out", str(tmp_path / "x.csv")]) == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "attack_sim.cli", "ring", "--modulation", "qam64",
                           "--scenario", "k"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("inner_m 0.010000")
