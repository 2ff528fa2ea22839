import json

import jsonschema
import numpy as np
import pytest

from phcenter import cli
from phcenter import documents as docs
from phcenter.lti_core import SystemModel
from phcenter.ph_form import generate_random_ph


def write_model(path, A, B, C, D, metadata=None):
    text = docs.dumps_model(SystemModel(A, B, C, D), metadata)
    path.write_text(text)
    return path


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json", "--no-timestamp")
    report = json.loads(out) if out else None
    if report is not None:
        jsonschema.validate(report, docs.REPORT_SCHEMA)
    return code, report


@pytest.fixture
def scalar_file(tmp_path):
    return write_model(tmp_path / "scalar.json", [[-1.0]], [[1.0]], [[1.0]], [[1.0]], {"name": "scalar"})


def test_canonical_round_trip_is_byte_identical(tmp_path):
    m = generate_random_ph(4, 2, seed=3)
    text = docs.dumps_model(m, {"name": "x", "seed": 3})
    model, meta = docs.loads_model(text)
    assert docs.dumps_model(model, meta) == text


def test_canonical_format_details():
    assert docs.canonical_dumps({"b": 0.1, "a": [-0.0, 1.0, 2]}) == '{"a":[0,1,2],"b":0.10000000000000001}\n'
    with pytest.raises(docs.DocumentError):
        docs.canonical_dumps({"x": float("nan")})


def test_decode_errors():
    with pytest.raises(docs.DocumentError):
        docs.loads_model("{")
    with pytest.raises(docs.DocumentError):
        docs.loads_model('{"schema_version": "other"}')


def test_check_exit_codes(tmp_path, scalar_file, capsys):
    code, rep = run_json(capsys, "check", scalar_file)
    assert code == 0 and rep["outputs"]["strictly_passive"]

    f = write_model(tmp_path / "integrator.json", [[0.0]], [[1.0]], [[1.0]], [[1.0]])
    code, rep = run_json(capsys, "check", f)
    assert code == 1
    assert "Hamiltonian imaginary-axis eigenvalues" in rep["outputs"]["failed_clauses"]

    (tmp_path / "bad.json").write_text("{not json")
    code, _, err = run(capsys, "check", tmp_path / "bad.json")
    assert code == 2 and "parse error" in err


def test_dimension_error_exit(tmp_path, capsys):
    doc = json.loads(docs.dumps_model(SystemModel.scalar(-1, 1, 1, 1)))
    doc["B"] = {"re": [[1.0, 2.0]], "im": [[0.0, 0.0]]}
    (tmp_path / "dim.json").write_text(json.dumps(doc))
    code, _, err = run(capsys, "check", tmp_path / "dim.json")
    assert code == 3 and "dimension" in err


def test_missing_file_and_bad_flags(capsys, tmp_path):
    code, _, _ = run(capsys, "check", tmp_path / "missing.json")
    assert code == 1
    with pytest.raises(SystemExit) as info:
        cli.main(["center", "x.json", "--barrier", "nope"])
    assert info.value.code == 2


def test_center_scalar(scalar_file, capsys):
    code, rep = run_json(capsys, "center", scalar_file, "--barrier", "standard")
    assert code == 0
    assert rep["outputs"]["X_center"]["re"][0][0] == pytest.approx(3.0, abs=1e-8)
    code, rep = run_json(capsys, "center", scalar_file, "--barrier", "ph")
    out = rep["outputs"]
    assert out["X_center"]["re"][0][0] == pytest.approx(1.0, abs=1e-8)
    assert out["io_balance"] <= 1e-8
    assert out["ph_realization"]["violations"] == []
    assert out["W_T_minus_2_dissipation_block"] <= 1e-10


def test_center_restart_flag(tmp_path, capsys):
    path = tmp_path / "g.json"
    assert cli.main(["generate", "--n", "5", "--m", "2", "--seed", "4", str(path)]) == 0
    capsys.readouterr()
    _, a = run_json(capsys, "center", path)
    _, b = run_json(capsys, "center", path, "--x0", "identity")
    Xa = np.array(a["outputs"]["X_center"]["re"]) + 1j * np.array(a["outputs"]["X_center"]["im"])
    Xb = np.array(b["outputs"]["X_center"]["re"]) + 1j * np.array(b["outputs"]["X_center"]["im"])
    assert np.linalg.norm(Xa - Xb) <= 1e-6 * np.linalg.norm(Xa)
    xfile = tmp_path / "x0.json"
    xfile.write_text(json.dumps({"X": docs.encode_matrix(np.eye(5))}))
    code, c = run_json(capsys, "center", path, "--x0", xfile)
    assert code == 0


def test_center_not_strictly_passive(tmp_path, capsys):
    f = write_model(tmp_path / "i.json", [[0.0]], [[1.0]], [[1.0]], [[1.0]])
    code, _, err = run(capsys, "center", f)
    assert code == 1 and "NotStrictlyPassive" in err


def test_radii_report(tmp_path, capsys):
    path = tmp_path / "g.json"
    cli.main(["generate", "--n", "6", "--m", "3", "--seed", "42", str(path)])
    capsys.readouterr()
    code, rep = run_json(capsys, "radii", path, "--which", "both")
    assert code == 0
    table = rep["outputs"]["table"]
    for key in ("alpha_sq", "beta_sq", "xi", "alpha_beta", "lambda_min_Rc", "rho_stab"):
        assert key in table
    assert table["xi"] >= table["alpha_beta"]
    assert rep["outputs"]["passivity"]["Delta_T_rank"] == 1


def test_radii_scalar_identity(scalar_file, capsys):
    code, rep = run_json(capsys, "radii", scalar_file, "--at", "identity")
    assert code == 0
    assert rep["outputs"]["passivity"]["exact_radius"] == pytest.approx(1.0, abs=1e-12)


def test_generate_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert cli.main(["generate", "--n", "6", "--m", "3", "--seed", "42", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    model, meta = docs.loads_model(a.read_text())
    assert meta["seed"] == 42 and "PCG64" in meta["rng"]
    code, _, _ = run(capsys, "check", a)
    assert code == 0
    cli.main(["generate", "--n", "1", "--m", "1", "--seed", "0", str(tmp_path / "s.json")])
    model, _ = docs.loads_model((tmp_path / "s.json").read_text())
    assert (model.n, model.m) == (1, 1)
    code, _, _ = run(capsys, "check", tmp_path / "s.json")
    assert code == 0


def test_generate_stdout(capsys):
    code, out, _ = run(capsys, "generate", "--n", "2", "--m", "1", "--real", "-")
    assert code == 0
    model, meta = docs.loads_model(out)
    assert model.is_real() and meta["field"] == "real"


def test_scalar_demo(capsys):
    code, rep = run_json(capsys, "scalar-demo", "-1", "1", "1", "1")
    out = rep["outputs"]
    assert code == 0
    assert out["standard"]["x_star_numeric"] == pytest.approx(3.0, abs=1e-8)
    assert out["ph"]["x_star_numeric"] == pytest.approx(1.0, abs=1e-8)
    assert out["standard"]["p"] == pytest.approx(4.0)
    assert out["standard"]["det_W"] == pytest.approx(8.0)
    code, rep = run_json(capsys, "scalar-demo", "-2", "1", "1", "1")
    assert rep["outputs"]["standard"]["x_star_closed_form"] == 5.0
    assert rep["outputs"]["standard"]["det_W"] == pytest.approx(24.0)
    code, rep = run_json(capsys, "scalar-demo", "1", "1", "1", "1")
    assert code == 1 and "a<0" in rep["outputs"]["failed_clauses"]


def test_reports_are_deterministic(scalar_file, capsys):
    for argv in (("check", scalar_file), ("center", scalar_file), ("radii", scalar_file), ("scalar-demo", "-1", "1", "1", "1")):
        _, first, _ = run(capsys, *argv, "--json", "--no-timestamp")
        _, second, _ = run(capsys, *argv, "--json", "--no-timestamp")
        assert first == second


def test_human_output(scalar_file, capsys):
    code, out, _ = run(capsys, "center", scalar_file)
    assert code == 0 and "X_center:" in out and "status: ok" in out
