"""Tests for the command-line interface: outputs, exit codes, determinism."""

import contextlib
import io
import json

import numpy as np
import pytest

from polyform.cli import main
from polyform.geometry import Polyhedron, check_euler


def run_cli(*argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(list(argv))
    return code, buf.getvalue()


def test_minimize_thomson12_has_icosahedral_label(tmp_path):
    out = tmp_path / "run.json"
    code, _ = run_cli("minimize", "--model", "thomson", "--n", "12",
                      "--seed", "42", "--starts", "30", "--out", str(out))
    assert code == 0
    record = json.loads(out.read_text())
    assert record["symmetry"]["label"] == "Y_h"
    assert record["converged"] is True


def test_minimize_rejects_n_below_two():
    code, _ = run_cli("minimize", "--model", "thomson", "--n", "1")
    assert code == 2


def test_minimize_requires_model():
    code, _ = run_cli("minimize", "--n", "4")
    assert code == 2


def test_table_matches_known_symmetries(tmp_path):
    out = tmp_path / "table.csv"
    code, _ = run_cli("table", "--model", "thomson", "--n-min", "2", "--n-max", "6",
                      "--seed", "0", "--starts", "25", "--out", str(out))
    assert code == 0
    rows = out.read_text().strip().splitlines()
    header = rows[0].split(",")
    assert header[:6] == ["n", "energy", "symmetry_label", "hull_V", "hull_F", "hull_E"]
    labels = [r.split(",")[2] for r in rows[1:]]
    assert labels == ["D_∞h", "D_3h", "T_d", "D_3h", "O_h"]


def test_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        code, _ = run_cli("minimize", "--model", "lj", "--n", "8",
                          "--seed", "7", "--starts", "10", "--out", str(path))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_bounds_toth_json(tmp_path):
    out = tmp_path / "bounds.json"
    code, _ = run_cli("bounds", "--kind", "toth", "--n-min", "2", "--n-max", "4",
                      "--seed", "0", "--starts", "10", "--out", str(out))
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["violations"] == 0
    assert all(r["satisfied"] for r in payload["rows"])


def test_bounds_atiyah_sampling(tmp_path):
    out = tmp_path / "atiyah.csv"
    code, _ = run_cli("bounds", "--kind", "atiyah", "--n-min", "2", "--n-max", "5",
                      "--samples", "400", "--seed", "1", "--out", str(out))
    assert code == 0
    rows = out.read_text().strip().splitlines()[1:]
    assert all(row.split(",")[4] == "True" for row in rows)


def test_export_off_and_csv(tmp_path):
    run_path = tmp_path / "run.json"
    code, _ = run_cli("minimize", "--model", "thomson", "--n", "4",
                      "--seed", "42", "--starts", "10", "--out", str(run_path))
    assert code == 0
    off_path = tmp_path / "hull.off"
    csv_path = tmp_path / "points.csv"
    json_path = tmp_path / "config.json"
    code, _ = run_cli("export", "--run", str(run_path), "--off", str(off_path),
                      "--csv", str(csv_path), "--json-out", str(json_path))
    assert code == 0
    text = off_path.read_text()
    assert text.splitlines()[1] == "4 4 6"
    poly = Polyhedron.from_off(text)
    assert check_euler(poly)
    assert len(csv_path.read_text().strip().splitlines()) == 5
    cfg = json.loads(json_path.read_text())
    assert cfg["constraint"] == "sphere"


def test_export_missing_record(tmp_path):
    code, _ = run_cli("export", "--run", str(tmp_path / "missing.json"),
                      "--off", str(tmp_path / "x.off"))
    assert code == 2


def test_config_file_with_flag_override(tmp_path):
    config = tmp_path / "spec.json"
    config.write_text(json.dumps({"model": "thomson", "n": 4, "seed": 3,
                                  "starts": 8, "out": str(tmp_path / "from_file.json")}))
    code, _ = run_cli("minimize", "--config", str(config))
    assert code == 0
    assert (tmp_path / "from_file.json").exists()
    # flags override the file
    code, _ = run_cli("minimize", "--config", str(config),
                      "--out", str(tmp_path / "override.json"))
    assert code == 0
    assert (tmp_path / "override.json").exists()
    rec_a = json.loads((tmp_path / "from_file.json").read_text())
    rec_b = json.loads((tmp_path / "override.json").read_text())
    assert rec_a == rec_b


def test_planar_table_reports_ring_census(tmp_path):
    out = tmp_path / "planar.csv"
    code, _ = run_cli("table", "--model", "atiyah", "--constraint", "plane",
                      "--n-min", "5", "--n-max", "5", "--seed", "0",
                      "--starts", "10", "--out", str(out))
    assert code == 0
    row = out.read_text().strip().splitlines()[1].split(",")
    ring_size, interior = int(row[6]), int(row[7])
    assert ring_size == 5 and interior == 0


def test_nonconvergence_exit_code(tmp_path):
    code, _ = run_cli("minimize", "--model", "thomson", "--n", "7",
                      "--seed", "0", "--starts", "2", "--max-iter", "2",
                      "--out", str(tmp_path / "r.json"))
    assert code == 3
