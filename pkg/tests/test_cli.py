import csv
import io
import json
import subprocess
import sys

import pytest

from conftest import CONFIGS, FIXTURES
from sdskit.cli import main
from sdskit.config import validate_document


def write_config(tmp_path, doc, name="c.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def sphere_doc(**kw):
    doc = {
        "objective": {"name": "sphere", "params": {"n": 2}},
        "solver": {"x0": [1.0, -0.5], "alpha0": 1.0, "c": 0.5, "max_iterations": 6},
    }
    doc.update(kw)
    return doc


def test_run_fixture_byte_identical(tmp_path, capsys):
    code = main(["run", str(CONFIGS / "sphere1d_fixture.json"), "--out-dir", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert (tmp_path / "trace.json").read_text() == (FIXTURES / "sphere1d_trace.json").read_text()
    assert "k=1 alpha=1 l=1 f=0 evals=4" in out
    report = json.loads((tmp_path / "trace.report.json").read_text())
    validate_document(report, "report")
    assert report["all_pass"] and report["initialization_certified"] is True


def test_json_and_csv_agree(tmp_path):
    assert main(["run", str(CONFIGS / "quadratic_convex.json"), "--out-dir", str(tmp_path), "--quiet"]) == 0
    trace = json.loads((tmp_path / "trace.json").read_text())
    rows = list(csv.DictReader(io.StringIO((tmp_path / "trace.csv").read_text())))
    assert len(rows) == len(trace["iterates"])
    for row, rec in zip(rows, trace["iterates"]):
        assert float(row["f"]) == rec["f"] and float(row["alpha"]) == rec["alpha"]
        assert int(row["l"]) == rec["l"] and int(row["evals"]) == rec["evals"]
        assert [float(row[f"x_{i + 1}"]) for i in range(len(rec["x"]))] == rec["x"]


def test_format_flag(tmp_path):
    assert main(["run", str(CONFIGS / "sphere1d_fixture.json"), "--out-dir", str(tmp_path), "--format", "csv"]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["trace.csv", "trace.report.csv"]


def test_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["run", str(CONFIGS / "rosenbrock_nonconvex.json"), "--out-dir", str(d), "--quiet"]) == 0
    for name in ("trace.json", "trace.csv", "trace.report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_rosenbrock_gradient_rows_pass(tmp_path):
    assert main(["run", str(CONFIGS / "rosenbrock_nonconvex.json"), "--out-dir", str(tmp_path), "--quiet"]) == 0
    rows = json.loads((tmp_path / "trace.report.json").read_text())["rows"]
    grad = [r for r in rows if r["check"] == "gradient_norm"]
    assert len(grad) == 30 and all(r["passed"] for r in grad)


def test_exit_2_on_non_spanning(tmp_path, capsys):
    doc = sphere_doc(directions={"vectors": [[1, 0], [0, 1]]})
    assert main(["run", write_config(tmp_path, doc), "--out-dir", str(tmp_path)]) == 2
    assert "not a positive spanning set" in capsys.readouterr().err


@pytest.mark.parametrize("text", ["{oops", json.dumps({"solver": {}})])
def test_exit_2_on_bad_config(tmp_path, text, capsys):
    path = tmp_path / "bad.json"
    path.write_text(text)
    assert main(["run", str(path)]) == 2
    assert "error" in capsys.readouterr().err


def test_exit_1_on_violated_bound(tmp_path, capsys):
    # an L far below the true local curvature breaks the gradient bound
    doc = json.loads((CONFIGS / "rosenbrock_nonconvex.json").read_text())
    doc["objective"]["L"] = 0.001
    assert main(["run", write_config(tmp_path, doc), "--out-dir", str(tmp_path), "--quiet"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["cosine"])
    assert info.value.code == 2


def test_cosine_mpb(capsys, tmp_path):
    assert main(["cosine", "--mpb", "3", "--samples", "20000", "--out-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "mu (exact)   = 0.577350269" in out and "|D|/mu^2     = 18" in out
    doc = json.loads((tmp_path / "cosine.json").read_text())
    assert doc["positive_spanning"] and doc["size_over_mu_squared"] == pytest.approx(18.0, abs=1e-9)


def test_cosine_files(tmp_path, capsys):
    one = tmp_path / "one.json"
    one.write_text(json.dumps({"dimension": 1, "directions": [[1.0], [-1.0]]}))
    assert main(["cosine", "--file", str(one), "--samples", "100"]) == 0
    assert "mu (exact)   = 1\n" in capsys.readouterr().out
    assert main(["cosine", "--file", str(CONFIGS / "minimal_basis_r2.json"), "--samples", "1000"]) == 0
    assert "0.382683432" in capsys.readouterr().out
    line = tmp_path / "line.json"
    line.write_text(json.dumps({"dimension": 2, "directions": [[1, 0], [-1, 0]]}))
    assert main(["cosine", "--file", str(line), "--samples", "100"]) == 0
    assert "positive spanning set: no" in capsys.readouterr().out
    assert main(["cosine", "--file", str(tmp_path / "none.json")]) == 2
    (tmp_path / "junk.json").write_text("[")
    assert main(["cosine", "--file", str(tmp_path / "junk.json")]) == 2


def test_cosine_seed_changes_sample(tmp_path):
    docs = []
    for seed in ("1", "1", "2"):
        d = tmp_path / seed / str(len(docs))
        main(["cosine", "--mpb", "2", "--samples", "500", "--seed", seed, "--out-dir", str(d)])
        docs.append(json.loads((d / "cosine.json").read_text())["mu_sampled"])
    assert docs[0] == docs[1] != docs[2]


def test_sweep_c(tmp_path, capsys):
    code = main(["sweep-c", str(CONFIGS / "sphere1d_fixture.json"), "--grid", "0.25,0.5,1,2,4",
                 "--out-dir", str(tmp_path)])
    assert code == 0
    doc = json.loads((tmp_path / "sweep_c.json").read_text())
    assert doc["bound_argmin"] == 1.0
    assert [r["bound_term"] for r in doc["rows"]] == [1.5625, 1.125, 1.0, 1.125, 1.5625]
    assert main(["sweep-c", str(CONFIGS / "sphere1d_fixture.json"), "--grid", "3",
                 "--out-dir", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "sweep_c.json").read_text())["bound_argmin"] == 3.0
    assert main(["sweep-c", str(CONFIGS / "sphere1d_fixture.json"), "--grid", "a,b"]) == 2


def test_sweep_c_needs_L(tmp_path):
    doc = sphere_doc(objective={"name": "rosenbrock"})
    assert main(["sweep-c", write_config(tmp_path, doc), "--grid", "1,2", "--out-dir", str(tmp_path)]) == 2


def test_init_compare(tmp_path, capsys):
    assert main(["init-compare", str(CONFIGS / "sphere_init_compare.json"), "--out-dir", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "init_compare.json").read_text())
    got = {r["strategy"]: (r["evaluations_used"], r["theoretical_cost_bound"]) for r in doc["reports"]}
    assert got["bootstrap"] == (6, 18.0)
    assert got["forcing-constant"] == (2, 2.0)
    assert got["stepsize"][0] == 6 and got["stepsize"][1] == pytest.approx(6.5)
    assert doc["checks"]["all_pass"]


def test_init_compare_needs_all_parameters(tmp_path):
    doc = sphere_doc(init={"strategy": "bootstrap", "alpha0": 1.0, "c": 0.5})
    assert main(["init-compare", write_config(tmp_path, doc), "--out-dir", str(tmp_path)]) == 2


def test_console_script(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "sdskit.cli", "cosine", "--mpb", "2", "--samples", "10"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "0.707106781" in proc.stdout
