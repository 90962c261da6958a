import csv
import io
import json

import pytest

from budgreed.bound import CertificateReport
from budgreed.adversarial import AdversarialReport
from budgreed.cli import main
from budgreed.core import CoverageOracle, Instance, ModularOracle, dump_instance
from budgreed.exact import random_instance


@pytest.fixture
def files(tmp_path, modular3, two_elem):
    paths = {}
    for name, inst in [("modular3", modular3), ("two", two_elem),
                       ("cov", random_instance("coverage", 10, 5, "harmonic"))]:
        p = tmp_path / f"{name}.json"
        dump_instance(inst, p)
        paths[name] = str(p)
    return paths


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_modular(capsys, files):
    code, out, _ = run(capsys, "run", "--instance", files["modular3"], "--alg", "greedy")
    assert code == 0
    assert "value=5.0" in out and "set=[0, 1]" in out and "winner=final-greedy-set" in out


def test_run_two_algorithms_json(capsys, files):
    code, out, _ = run(capsys, "run", "--instance", files["two"], "--alg", "plain-greedy,greedy", "--format", "json")
    assert code == 0
    res = json.loads(out)
    assert [r["solution"]["value"] for r in res] == [0.02, 1.0]


def test_run_workers_independent(capsys, files, monkeypatch):
    outs = []
    for w in ("1", "8"):
        code, out, _ = run(capsys, "run", "--instance", files["cov"], "--alg", "k-guess:2:plain-greedy",
                           "--workers", w, "--format", "json", "--trajectory")
        assert code == 0
        outs.append(out)
    monkeypatch.setenv("BUDGREED_WORKERS", "3")
    outs.append(run(capsys, "run", "--instance", files["cov"], "--alg", "k-guess:2:plain-greedy",
                    "--format", "json", "--trajectory")[1])
    assert outs[0] == outs[1] == outs[2]


def test_bad_env_workers(capsys, files, monkeypatch):
    monkeypatch.setenv("BUDGREED_WORKERS", "zero")
    assert run(capsys, "run", "--instance", files["modular3"])[0] == 2


def test_usage_errors(capsys, files):
    assert run(capsys, "run", "--instance", files["modular3"], "--alg", "nope")[0] == 2
    assert run(capsys, "run", "--instance", files["modular3"], "--alg", "threshold:2:greedy")[0] == 2
    assert run(capsys, "verify-bound", "--rho", "1/2", "--delta", "1/10")[0] == 2
    assert run(capsys, "verify-bound", "--delta", "2/7")[0] == 2
    assert run(capsys, "adversarial", "--n", "10")[0] == 2
    assert run(capsys, "ratio-batch", "--n", "30")[0] == 2
    assert run(capsys, "ratio-batch", "--profile", "zipf")[0] == 2
    assert run(capsys, "validate-oracle")[0] == 2
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_data_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "modular",\n "budget": 1,\n "costs": [1, 1]\n')
    code, _, err = run(capsys, "run", "--instance", str(bad))
    assert code == 3 and "line" in err
    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps({"kind": "modular", "budget": 1, "costs": [1]}))
    code, _, err = run(capsys, "run", "--instance", str(missing))
    assert code == 3 and "weights" in err
    assert run(capsys, "run", "--instance", str(tmp_path / "nowhere.json"))[0] == 3


def test_verify_bound_json_roundtrip(capsys):
    code, out, _ = run(capsys, "verify-bound", "--rho", "52/125", "--delta", "1/50", "--grid", "1000000", "--json")
    assert code == 0
    rep = CertificateReport.from_dict(json.loads(out))
    assert rep.certified and json.loads(rep.to_json()) == json.loads(out)


def test_verify_bound_not_certified(capsys):
    code, out, _ = run(capsys, "verify-bound", "--rho", "49/100", "--delta", "1/50", "--grid", "1000000")
    assert code == 4 and "certified      false" in out


def test_verify_bound_exact_grid(capsys):
    code, out, _ = run(capsys, "verify-bound", "--rho", "3/8", "--delta", "1/20", "--grid", "exact", "--json")
    assert code == 0 and json.loads(out)["grid"] is None


def test_adversarial_json(capsys):
    code, out, _ = run(capsys, "adversarial", "--n", "20000", "--json")
    rep = AdversarialReport.from_dict(json.loads(out))
    assert code == 0 and rep.ok and rep.engine == "fast"
    code, out, _ = run(capsys, "adversarial", "--n", "60", "--full-engine")
    assert code == 4 and "FAIL  greedy ratio" in out


def test_analytic(capsys):
    code, out, _ = run(capsys, "analytic", "--points", "200", "--json")
    d = json.loads(out)
    assert code == 0 and "z_grid" not in d
    assert abs(d["p_min"] - d["p_min_closed"]) < 1e-6
    code, out, _ = run(capsys, "analytic", "--points", "50", "--json", "--grid")
    assert len(json.loads(out)["z_grid"]) == 50
    code, out, _ = run(capsys, "analytic", "--points", "50")
    assert "min p" in out


def test_validate_oracle(capsys, files):
    code, out, _ = run(capsys, "validate-oracle", "--instance", files["cov"], "--trials", "500", "--json")
    d = json.loads(out)
    assert code == 0 and d["violations"] == []
    assert run(capsys, "validate-oracle", "--random", "modular:8:1:uniform", "--residual", "2", "--trials", "200")[0] == 0
    assert run(capsys, "validate-oracle", "--adversarial", "30:0.0001:0.461", "--trials", "200")[0] == 0
    assert run(capsys, "validate-oracle", "--random", "modular:8", "--trials", "10")[0] == 2


def test_ratio_batch_csv(capsys, tmp_path):
    out_path = tmp_path / "r.csv"
    args = ["ratio-batch", "--family", "modular", "--n", "8", "--seeds", "0:6", "--profile", "harmonic,uniform",
            "--alg", "greedy,greedy-plus"]
    assert run(capsys, *args, "--out", str(out_path))[0] == 0
    rows = list(csv.DictReader(out_path.open()))
    per_seed = [r for r in rows if r["seed"] not in ("min", "mean")]
    assert len(per_seed) == 6 * 2 * 2
    assert {r["seed"] for r in rows if r["seed"] in ("min", "mean")} == {"min", "mean"}
    code, out1, _ = run(capsys, *args, "--workers", "1")
    code, out8, _ = run(capsys, *args, "--workers", "4")
    assert out1 == out8 == out_path.read_text()


def test_ratio_batch_n14_floors(capsys):
    code, out, _ = run(capsys, "ratio-batch", "--family", "coverage", "--n", "14", "--seeds", "200",
                       "--alg", "greedy,greedy-plus,k-guess:1:greedy-plus")
    assert code == 0
    mins = {r["algorithm"]: float(r["ratio"]) for r in csv.DictReader(io.StringIO(out)) if r["seed"] == "min"}
    assert mins["greedy"] >= 0.427 - 1e-9
    assert mins["greedy-plus"] >= 0.5 - 1e-9
    assert mins["k-guess:1:greedy-plus"] >= 0.6174 - 1e-9
