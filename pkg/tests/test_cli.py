import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from coverset.cli import main
from coverset.coverage import MonitoringGrid, random_deployment

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write_config(path, **kw):
    data = {"algorithm": "pso", "area": {"width": 30, "height": 30, "cells_x": 30, "cells_y": 30},
            "radius": 5, "n_sensors": 15, "generations": 10, "checkpoints": [5, 10]}
    data.update(kw)
    path.write_text(json.dumps(data))
    return path


def test_run_writes_artifacts(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json")
    assert main(["run", "--config", str(cfg), "--seed", "4", "--out", str(tmp_path / "out")]) == 0
    assert "pso seed=4" in capsys.readouterr().out
    meta = json.loads((tmp_path / "out" / "result.json").read_text())["metadata"]
    assert meta["seed"] == 4


def test_run_twice_byte_identical(tmp_path):
    cfg = write_config(tmp_path / "c.json", algorithm="lo")
    for k in range(2):
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / f"o{k}")]) == 0
    a = (tmp_path / "o0" / "convergence.csv").read_bytes()
    assert a == (tmp_path / "o1" / "convergence.csv").read_bytes()


def test_config_error_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", algorithm="annealing")
    assert main(["run", "--config", str(cfg)]) == 2
    assert "valid names" in capsys.readouterr().err
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["run", "--config", str(tmp_path / "bad.json")]) == 2


def test_io_error_exit_code(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 3
    cfg = write_config(tmp_path / "c.json")
    (tmp_path / "blocker").write_text("")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "blocker" / "x")]) == 3
    assert "blocker" in capsys.readouterr().err


def test_invariant_exit_code(tmp_path, monkeypatch):
    from coverset import cli
    from coverset.framework import InvariantError

    def boom(*a, **k):
        raise InvariantError("lost incumbent")

    monkeypatch.setattr(cli, "run_experiment", boom)
    assert main(["run", "--config", str(write_config(tmp_path / "c.json"))]) == 4


def test_compare(tmp_path, capsys):
    write_config(tmp_path / "a.json", label="a", algorithm="iga")
    write_config(tmp_path / "b.json", label="b", algorithm="lo")
    (tmp_path / "m.json").write_text(json.dumps({"configs": ["a.json", "b.json"]}))
    rc = main(["compare", "--manifest", str(tmp_path / "m.json"), "--seeds", "1,2,3", "--out", str(tmp_path / "cmp")])
    assert rc == 0
    table = (tmp_path / "cmp" / "compare.csv").read_text().splitlines()
    assert len(table) == 1 + 2 * 2
    assert capsys.readouterr().out.splitlines() == table


def test_map(tmp_path, capsys):
    g = MonitoringGrid()
    d = random_deployment(4, g, 0)
    (tmp_path / "d.json").write_text(json.dumps(d.to_dict()))
    assert main(["map", "--deployment", str(tmp_path / "d.json"), "--bits", "1010", "--out",
                 str(tmp_path / "m.pgm")]) == 0
    assert (tmp_path / "m.pgm").read_text().startswith("P2\n100 100\n255\n")
    assert (tmp_path / "m.txt").exists() and (tmp_path / "m.json").exists()
    assert main(["map", "--deployment", str(tmp_path / "d.json"), "--bits", "10", "--out",
                 str(tmp_path / "m.pgm")]) == 2
    assert main(["map", "--deployment", str(tmp_path / "nope.json"), "--bits", "1010", "--out",
                 str(tmp_path / "m.pgm")]) == 3


def test_console_script(tmp_path):
    cfg = write_config(tmp_path / "c.json", algorithm="random")
    env = dict(os.environ, COVERSET_THREADS="1")
    proc = subprocess.run([sys.executable, "-m", "coverset.cli", "run", "--config", str(cfg)],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 0, proc.stderr
    assert "15/15 active" in proc.stdout
