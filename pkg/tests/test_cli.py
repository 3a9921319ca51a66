from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from lipext import Molecule, RunStore, SubsetRef, kr_norm
from lipext.cli import main
from lipext.io import (
    ParseError,
    canonical,
    dumps,
    load_function,
    load_molecule,
    load_space,
    load_subset,
    space_to_dict,
)
from lipext.report import CSV_HEADER, reports_to_json

from conftest import random_graph_metric


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return path


# --- file formats ----------------------------------------------------------

def test_space_roundtrip(tmp_path, rng):
    M = random_graph_metric(rng, 5)
    p = _write(tmp_path / "m.json", space_to_dict(M))
    M2 = load_space(p)
    assert np.array_equal(M.dist, M2.dist) and M2.points == M.points


def test_subset_function_molecule(tmp_path):
    _write(tmp_path / "m.json", {"points": ["a", "b", "c"], "dist": [[0, 1, 2], [1, 0, 1], [2, 1, 0]]})
    _write(tmp_path / "s.json", {"space": "m.json", "indices": [0, 2]})
    _write(tmp_path / "f.json", {"domain": "s.json", "values": [1.0, -1.0]})
    _write(tmp_path / "mu.json", {"space": "m.json", "weights": {"a": 1, "c": -1}})
    assert load_subset(tmp_path / "s.json").indices == (0, 2)
    assert load_function(tmp_path / "f.json")(2) == -1.0
    mu = load_molecule(tmp_path / "mu.json")
    assert kr_norm(mu) == 2.0


def test_parse_errors(tmp_path):
    with pytest.raises(ParseError):
        load_space(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{nope")
    with pytest.raises(ParseError):
        load_space(tmp_path / "bad.json")
    with pytest.raises(ParseError):
        load_space({"points": ["a"]})


def test_canonical_rounding_idempotent():
    x = {"b": 1 / 3, "a": [np.float64(2.0) / 7, float("inf")]}
    once = dumps(x)
    assert dumps(json.loads(once)) == once
    assert canonical(0.1 + 0.2) == 0.3


# --- commands --------------------------------------------------------------

def test_report_without_runs(workdir, capsys):
    assert main(["report"]) == 2
    assert "NoPriorRun" in capsys.readouterr().err


def test_empty_run_set_is_brackets(workdir, capsys):
    RunStore().clear()
    assert main(["report"]) == 0
    assert capsys.readouterr().out.strip() == "[]"
    assert reports_to_json([]) == "[]"


def test_csv_header(workdir, capsys):
    RunStore().clear()
    main(["report", "--format", "csv"])
    assert capsys.readouterr().out.splitlines()[0] == ",".join(CSV_HEADER) == "command,row,claimed,computed,margin,pass"


def test_verify_grid_interp(workdir):
    assert main(["verify", "grid-interp", "--n", "2", "--box", "3", "--trials", "200", "--out", "g.json"]) == 0
    rep = json.loads((workdir / "g.json").read_text())[0]
    row = next(r for r in rep["results"] if r["row"] == "exact norm = 1")
    assert abs(row["computed"] - 1) <= 1e-9 and rep["pass"]


def test_verify_cone(workdir):
    assert main(["verify", "cone", "--n", "3", "--trials", "500", "--out", "c.json"]) == 0
    rep = json.loads((workdir / "c.json").read_text())[0]
    assert rep["results"][0]["computed"] <= 2 + 1e-9


def test_verify_empty_family_exit_2(workdir, capsys):
    assert main(["verify", "glue-family", "--sets", "0"]) == 2
    assert "EmptyFamily" in capsys.readouterr().err


@pytest.mark.parametrize("target", ["glue-pair", "net-ball", "place-dyadic", "balls-20", "balls-24"])
def test_other_targets_pass(workdir, target):
    assert main(["verify", target, "--out", "o.json"]) == 0


def test_failing_row_exit_1(workdir, monkeypatch):
    import lipext.verify as verify

    def bad(**kw):
        rep = verify.RunReport("verify fake", {"tol": 1e-9})
        rep.add("always fails", 1.0, 2.0)
        return rep

    monkeypatch.setitem(verify.TARGETS, "balls-20", bad)
    assert main(["verify", "balls-20"]) == 1


def test_usage_error_exit_2(workdir):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nonsense"])
    assert exc.value.code == 2


def _space_files(workdir, dist, indices):
    _write(workdir / "m.json", {"dist": dist})
    _write(workdir / "s.json", {"space": "m.json", "indices": indices})


def _e(workdir):
    rep = json.loads((workdir / "e.json").read_text())[0]
    return rep["details"]["e"], rep


def test_compute_e_s_equals_m(workdir):
    _space_files(workdir, [[0, 1, 2], [1, 0, 1.5], [2, 1.5, 0]], [0, 1, 2])
    assert main(["compute-e", "--space", "m.json", "--subset", "s.json", "--out", "e.json"]) == 0
    assert _e(workdir)[0] == 1.0


def test_compute_e_collinear_endpoints(workdir):
    _space_files(workdir, [[0, 1, 2], [1, 0, 1], [2, 1, 0]], [0, 2])
    assert main(["compute-e", "--space", "m.json", "--subset", "s.json", "--out", "e.json"]) == 0
    assert abs(_e(workdir)[0] - 1.0) <= 1e-9


def test_compute_e_random_bracketing(workdir, rng):
    M = random_graph_metric(rng, 5)
    _space_files(workdir, M.dist.tolist(), [1, 2, 4])
    assert main(["compute-e", "--space", "m.json", "--subset", "s.json", "--out", "e.json"]) == 0
    e, rep = _e(workdir)
    assert e >= 1 - 1e-9
    assert all(e <= b["norm"] + 1e-9 for b in rep["details"]["upper_bounds"])


def test_compute_e_too_large(workdir, rng):
    M = random_graph_metric(rng, 13)
    _space_files(workdir, M.dist.tolist(), [0, 1])
    assert main(["compute-e", "--space", "m.json", "--subset", "s.json"]) == 2


def test_report_roundtrip_bytes(workdir, capsys):
    main(["verify", "balls-20"])
    main(["verify", "net-ball", "--n", "1"])
    capsys.readouterr()
    main(["report", "--out", "r.json"])
    text = (workdir / "r.json").read_text()
    assert reports_to_json(json.loads(text)) == text


def test_determinism_across_processes(workdir):
    cmd = [sys.executable, "-m", "lipext", "verify", "glue-family", "--seed", "7", "--families", "3"]
    a = subprocess.run(cmd, capture_output=True, text=True, cwd=workdir)
    b = subprocess.run(cmd, capture_output=True, text=True, cwd=workdir)
    assert a.returncode == 0 and a.stdout == b.stdout
