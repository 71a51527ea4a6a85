import json
import subprocess
import sys

import numpy as np
import pytest

import wpcurves.transforms
from wpcurves.cli import main
from wpcurves.grid import GridFunction, make_grid, sample
from wpcurves.io import SCHEMA_VERSION, dumps, gridfunction_to_csv, gridfunction_to_dict


@pytest.fixture
def files(tmp_path):
    g = make_grid(256)
    paths = {}

    def put(name, f):
        path = tmp_path / name
        path.write_text(dumps(gridfunction_to_dict(f)))
        paths[name] = path

    put("cos1.json", sample(g, np.cos))
    put("constant.json", GridFunction(g, np.full(256, 2.0)))
    put("hline.json", sample(g, lambda x: x + 0.2 * x / (1 + x * x), "line"))
    (tmp_path / "cos1.csv").write_text(gridfunction_to_csv(sample(g, np.cos)))
    paths["cos1.csv"] = tmp_path / "cos1.csv"
    (tmp_path / "broken.json").write_text('{"domain": "circle", "n": 4}')
    paths["broken.json"] = tmp_path / "broken.json"
    return paths


def run(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def values(data):
    v = np.asarray(data["values"])
    return v[:, 0] + 1j * v[:, 1]


def test_compute_hilbert_of_cosine(files, tmp_path):
    code, data = run(["compute", "hilbert", str(files["cos1.json"])], tmp_path)
    assert code == 0 and data["schema"] == SCHEMA_VERSION
    assert np.abs(values(data) - np.sin(make_grid(256).theta)).max() < 1e-14


def test_compute_hilbert_csv_input(files, tmp_path):
    code, data = run(["compute", "hilbert", str(files["cos1.csv"])], tmp_path)
    assert code == 0 and np.abs(values(data) - np.sin(make_grid(256).theta)).max() < 1e-14


def test_compute_norm_of_constant(files, tmp_path):
    code, data = run(["compute", "norm", "--kind", "bhat", "--p", "1", str(files["constant.json"])], tmp_path)
    assert code == 0 and data["value"] == 0.0 and data["type"] == "NormReport"


def test_compute_project_and_cauchy(files, tmp_path):
    code, data = run(["compute", "project", "--sign", "minus", str(files["cos1.json"])], tmp_path)
    assert code == 0
    assert np.abs(values(data) - 0.5 * np.exp(-1j * make_grid(256).theta)).max() < 1e-14
    code, data = run(["compute", "cauchy", str(files["cos1.json"])], tmp_path, "c.json")
    assert code == 0 and data["curve"] == "identity"
    assert np.abs(values(data) - np.sin(make_grid(256).theta)).max() < 1e-13
    code, data = run(["compute", "cauchy", "--c2", "0.2", "--part", "plus", str(files["cos1.json"])], tmp_path, "d.json")
    assert code == 0 and data["curve"] == "welded"


def test_compute_weld(tmp_path):
    code, data = run(["compute", "weld", "--c2", "0.2", "--n", "1024"], tmp_path)
    assert code == 0 and data["type"] == "WeldingResult"
    assert data["residual"] < 1e-7 and data["n"] == 1024


def test_compute_ba_extend_from_samples_and_field(files, tmp_path):
    code, data = run(["compute", "ba-extend", str(files["hline.json"]), "--box=-1,1,0.05,1"], tmp_path)
    assert code == 0 and 0 < data["sup"] < 1 and data["hyperbolic_norm"] > 0
    field_path = tmp_path / "field.json"
    field_path.write_text(json.dumps(data["beltrami"]))
    code, again = run(["compute", "ba-extend", str(field_path)], tmp_path, "again.json")
    assert code == 0 and again["source"] == "field"
    assert again["hyperbolic_norm"] == pytest.approx(data["hyperbolic_norm"], rel=1e-12)


def test_exit_codes(files, tmp_path):
    assert main(["compute", "frobnicate", "x"]) == 64
    assert main(["nonsense"]) == 64
    assert main(["suite", "nonsense"]) == 64
    assert main(["compute", "norm", "--kind", "bhat", str(files["broken.json"])]) == 2
    assert main(["compute", "norm", "--kind", "bhat", str(tmp_path / "missing.json")]) == 2
    assert main(["compute", "norm", "--kind", "bp", "--p", "1", str(files["cos1.json"])]) == 2
    assert main(["compute", "weld", "--c2", "0.9"]) == 2
    assert main(["compute", "weld", "--c2", "0.2", "--n", "100"]) == 2
    # simple curve, but the Theodorsen contraction condition fails
    assert main(["compute", "weld", "--c2", "0.45", "--n", "256"]) == 3


def test_thread_cap(files, tmp_path, monkeypatch):
    monkeypatch.setenv("WPCURVES_THREADS", "zero")
    assert main(["compute", "hilbert", str(files["cos1.json"])]) == 2
    monkeypatch.setenv("WPCURVES_THREADS", "1")
    code, _ = run(["compute", "hilbert", str(files["cos1.json"])], tmp_path)
    assert code == 0


def test_suite_report_plots_and_determinism(tmp_path):
    first, second = tmp_path / "a" / "report.json", tmp_path / "b" / "report.json"
    assert main(["suite", "identities", "besov", "--out", str(first)]) == 0
    assert main(["suite", "identities", "besov", "--out", str(second), "--no-png"]) == 0
    a, b = json.loads(first.read_text()), json.loads(second.read_text())
    assert a.pop("timing") and b.pop("timing")
    assert [p.replace(".png", "") for p in a.pop("plots") if p.endswith(".csv")] == [
        p for p in b.pop("plots")]
    assert a == b
    assert [c["criterion"] for c in a["criteria"]] == [1, 2, 3]
    plots = first.parent / "report_plots"
    assert (plots / "criterion02_line_hilbert.png").read_bytes()[:4] == b"\x89PNG"
    assert not list((second.parent / "report_plots").glob("*.png"))
    header = (plots / "criterion02_line_hilbert.csv").read_text().splitlines()[0]
    assert header == "x,H f(x)"


def test_suite_negative_control(monkeypatch, tmp_path):
    monkeypatch.setattr(wpcurves.transforms, "hilbert_multiplier", lambda k: -1j * np.sign(k) * 1.001)
    code, data = run(["suite", "identities"], tmp_path)
    assert code == 1 and not data["passed"]
    assert any(not c["passed"] for c in data["criteria"][0]["checks"])


def test_suite_validation(tmp_path):
    assert main(["suite", "welding", "--n", "1000"]) == 2
    assert main(["suite", "welding", "--tol", "-1"]) == 2


def test_suite_cauchy_reports_convergence_ratio(tmp_path):
    code, data = run(["suite", "cauchy", "--c2", "0.2"], tmp_path)
    crit7 = data["criteria"][0]
    ratio = next(c for c in crit7["checks"] if "ratio" in c["name"])
    assert crit7["criterion"] == 7 and ratio["value"] >= 4 and ratio["passed"]
    assert data["config"]["sizes"] == [512, 1024]


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "wpcurves", "compute", "hilbert", str(files["cos1.json"])],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["n"] == 256
