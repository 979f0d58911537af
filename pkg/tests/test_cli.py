import json

import pytest

from qramprep.cli import main
from qramprep.stateprep import PipelineError

GOLDEN = [-2.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0, -1.0]


def write_vector(tmp_path, values, name="v.json", dim=None):
    doc = {
        "kind": "vector",
        "dim": len(values) if dim is None else dim,
        "entries": [
            {"index": i, "value": v} for i, v in enumerate(values) if v != 0.0],
    }
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def write_matrix(tmp_path, rows, name="m.json"):
    doc = {
        "kind": "matrix",
        "rows": len(rows),
        "cols": len(rows[0]),
        "entries": [
            {"index": [i, j], "value": v}
            for i, row in enumerate(rows) for j, v in enumerate(row) if v != 0.0],
    }
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- build --------------------------------------------------------------------


def test_build_vector_golden(tmp_path, capsys):
    path = write_vector(tmp_path, GOLDEN)
    code, out, _ = run(capsys, ["build", path])
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "vector"
    assert doc["dim"] == 8
    assert doc["levels"] == [
        [10.0],
        [8.0, 2.0],
        [4.0, 4.0, 0.0, 2.0],
        [4.0, 0.0, 4.0, 0.0, 0.0, 0.0, 1.0, 1.0],
    ]
    assert doc["signs"] == [1, 0, 0, 0, 0, 0, 0, 1]


def test_build_pads_to_power_of_two(tmp_path, capsys):
    path = write_vector(tmp_path, [3.0, 4.0, 5.0])
    code, out, _ = run(capsys, ["build", path])
    assert code == 0
    doc = json.loads(out)
    assert doc["dim"] == 4
    assert doc["levels"][-1] == [9.0, 16.0, 25.0, 0.0]


def test_build_matrix(tmp_path, capsys):
    path = write_matrix(tmp_path, [[1.0, 2.0], [-3.0, 4.0]])
    code, out, _ = run(capsys, ["build", path])
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "matrix"
    assert doc["norm_tree"]["levels"][0] == [30.0]
    assert len(doc["rows"]) == 2


def test_build_zero_vector_warns_but_succeeds(tmp_path, capsys):
    path = write_vector(tmp_path, [0.0, 0.0])
    code, out, err = run(capsys, ["build", path])
    assert code == 0
    assert "zero vector" in err
    assert json.loads(out)["levels"][0] == [0.0]


# -- prep ---------------------------------------------------------------------


def test_prep_vector_golden(tmp_path, capsys):
    path = write_vector(tmp_path, GOLDEN)
    code, out, _ = run(capsys, ["prep", path])
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "vector" and doc["mode"] == "vector"
    assert doc["dim"] == 8
    assert doc["fidelity"] >= 1.0 - 1e-10
    assert doc["ancilla_clean"] is True


def test_prep_metrics_and_target_check(tmp_path, capsys):
    path = write_vector(tmp_path, GOLDEN)
    code, out, _ = run(capsys, ["prep", path, "--metrics", "--target-check"])
    assert code == 0
    doc = json.loads(out)
    assert doc["metrics"]["queries"] == 14
    assert doc["metrics"]["rotations"] == 6
    assert len(doc["metrics"]["per_level"]) == 3
    assert doc["metrics"]["sign"][0]["variant"] == "kickback"
    assert doc["target_max_abs_error"] <= 1e-12


def test_prep_trace_to_stderr(tmp_path, capsys):
    path = write_vector(tmp_path, GOLDEN)
    code, _, err = run(capsys, ["prep", path, "--trace"])
    assert code == 0
    assert "ROTATE prefix=- p=0.8" in err
    assert "LEVEL 1 LOAD_B cells=10" in err


def test_prep_trace_to_file(tmp_path, capsys):
    path = write_vector(tmp_path, GOLDEN)
    trace_path = tmp_path / "trace.txt"
    code, _, err = run(capsys, ["prep", path, "--trace-file", str(trace_path)])
    assert code == 0
    assert err == ""
    text = trace_path.read_text()
    assert text.startswith("LEVEL 1 LOAD_B cells=10")
    assert "SIGN Z" in text


def test_prep_output_deterministic(tmp_path, capsys):
    path = write_vector(tmp_path, GOLDEN)
    _, out1, _ = run(capsys, ["prep", path, "--metrics", "--target-check"])
    _, out2, _ = run(capsys, ["prep", path, "--metrics", "--target-check"])
    assert out1 == out2


def test_prep_matrix_modes(tmp_path, capsys):
    path = write_matrix(tmp_path, [[1.0, 2.0], [-3.0, 4.0]])
    code, out, _ = run(capsys, ["prep", path])
    assert code == 0 and json.loads(out)["mode"] == "encode"
    code, out, _ = run(capsys, ["prep", path, "--norms"])
    assert code == 0 and json.loads(out)["mode"] == "norms"
    code, out, _ = run(capsys, ["prep", path, "--row", "1"])
    assert code == 0 and json.loads(out)["mode"] == "row"
    assert json.loads(out)["fidelity"] >= 1.0 - 1e-10


def test_prep_flag_misuse(tmp_path, capsys):
    vec = write_vector(tmp_path, GOLDEN)
    mat = write_matrix(tmp_path, [[1.0, 2.0], [-3.0, 4.0]])
    assert run(capsys, ["prep", vec, "--norms"])[0] == 2
    assert run(capsys, ["prep", vec, "--row", "0"])[0] == 2
    assert run(capsys, ["prep", mat, "--norms", "--row", "0"])[0] == 2
    assert run(capsys, ["prep", mat, "--row", "9"])[0] == 2


# -- exit codes ---------------------------------------------------------------


def test_prep_zero_vector_degenerate(tmp_path, capsys):
    path = write_vector(tmp_path, [0.0, 0.0, 0.0, 0.0])
    code, _, err = run(capsys, ["prep", path])
    assert code == 3
    assert "error" in err


def test_prep_dim_one_degenerate(tmp_path, capsys):
    path = write_vector(tmp_path, [5.0])
    assert run(capsys, ["prep", path])[0] == 3


def test_prep_zero_row_degenerate(tmp_path, capsys):
    path = write_matrix(tmp_path, [[1.0, 2.0], [0.0, 0.0]])
    assert run(capsys, ["prep", path, "--row", "1"])[0] == 3


def test_malformed_input(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, ["build", str(bad)])[0] == 2
    missing_field = tmp_path / "m2.json"
    missing_field.write_text(json.dumps({"kind": "vector", "entries": []}))
    code, _, err = run(capsys, ["build", str(missing_field)])
    assert code == 2
    assert "missing key 'dim'" in err
    no_kind = tmp_path / "m4.json"
    no_kind.write_text(json.dumps({"vector": [1, 2]}))
    code, _, err = run(capsys, ["build", str(no_kind)])
    assert code == 2
    assert "missing key 'kind'" in err
    unknown = tmp_path / "m3.json"
    unknown.write_text(json.dumps({"kind": "tensor"}))
    assert run(capsys, ["build", str(unknown)])[0] == 2
    assert run(capsys, ["build", str(tmp_path / "absent.json")])[0] == 2


def test_prep_verification_gate(tmp_path, capsys, monkeypatch):
    import qramprep.cli as cli

    class FakeResult:
        fidelity = 0.5
        ancilla_clean = True
        trace = ""

    path = write_vector(tmp_path, GOLDEN)
    monkeypatch.setattr(cli, "prepare_vector", lambda tree, tol: FakeResult())
    assert run(capsys, ["prep", path])[0] == 4


def test_pipeline_error_maps_to_verify_exit(tmp_path, capsys, monkeypatch):
    import qramprep.cli as cli

    def boom(tree, tol):
        raise PipelineError("ancilla dirty")

    path = write_vector(tmp_path, GOLDEN)
    monkeypatch.setattr(cli, "prepare_vector", boom)
    code, _, err = run(capsys, ["prep", path])
    assert code == 4
    assert "ancilla dirty" in err


# -- route --------------------------------------------------------------------


def test_route_counters(capsys):
    code, out, _ = run(capsys, ["route", "3", "110"])
    assert code == 0
    doc = json.loads(out)
    assert doc["n"] == 3
    assert doc["address"] == "110"
    assert doc["routing_ops"] == 3
    assert doc["stores"] == 3
    assert doc["bus_loads"] == 3
    assert doc["time_steps"] == 9
    assert doc["entangled_switches"] == 3


def test_route_trace(capsys):
    code, _, err = run(capsys, ["route", "2", "10", "--trace"])
    assert code == 0
    lines = err.strip().splitlines()
    assert lines[0] == "STEP 0 BUS_LOAD node=0"
    assert lines[1] == "STEP 1 STORE node=0"
    assert "STEP 3 PASS node=0 dir=1" in lines


def test_route_errors(capsys):
    assert run(capsys, ["route", "0", ""])[0] == 2
    assert run(capsys, ["route", "3", "10"])[0] == 2
    assert run(capsys, ["route", "2", "12"])[0] == 2


# -- selftest -----------------------------------------------------------------


def test_selftest_deterministic(capsys):
    argv = ["selftest", "--seed", "7", "--dims", "2", "4", "--count", "2"]
    code, out1, _ = run(capsys, argv)
    assert code == 0
    _, out2, _ = run(capsys, argv)
    assert out1 == out2
    doc = json.loads(out1)
    assert doc["preps"] == 4
    assert doc["seed"] == 7
    assert doc["backend"] in ("compiled", "pure-python")
    assert doc["min_fidelity"] >= 1.0 - 1e-9
    assert doc["all_clean"] is True
    assert doc["queries_ok"] is True


def test_selftest_rejects_bad_dims(capsys):
    assert run(capsys, ["selftest", "--dims", "3"])[0] == 2
