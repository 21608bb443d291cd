import json
import re
import subprocess
import sys

import pytest

from arakelov.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


def floats_outside_numeric(doc):
    found = []

    def walk(node, path):
        if isinstance(node, float):
            found.append(path)
        elif isinstance(node, dict):
            for k, v in node.items():
                if k != "numeric":
                    walk(v, f"{path}.{k}")
        elif isinstance(node, list):
            for i, v in enumerate(node):
                walk(v, f"{path}[{i}]")

    walk(doc, "$")
    return found


def test_x0n_35_json(capsys):
    code, doc = run_json(capsys, "x0n", "--N", "35")
    assert code == 0
    a = {row["p"]: row["a_p"] for row in doc["per_prime"]}
    assert a == {5: "-1/16", 7: "-11/96"}
    assert all(c["passed"] for c in doc["checks"])
    assert floats_outside_numeric(doc) == []
    inf5 = next(c for c in doc["per_prime"][0]["cusps"] if c["name"] == "inf")
    assert inf5["G"] == ["0/1", "5/16", "5/48", "5/24", "5/48", "5/24"]
    assert inf5["G2"] == "-25/96"


def test_rationals_are_num_den_strings(capsys):
    _, doc = run_json(capsys, "x0n", "--N", "55")
    for row in doc["per_prime"]:
        for key in ("a_p", "b_p", "sum_bG2", "sum_bF2"):
            assert re.fullmatch(r"-?\d+/\d+", row[key])


def test_x0n_bad_level(capsys):
    code, _, err = run(capsys, "x0n", "--N", "36")
    assert code == 2
    assert "N must be square-free" in err


def test_x0n_bindings(capsys):
    binds = ["--bind", "kappa0=1", "--bind", "kappa=0", "--bind", "kappa1=0", "--bind", "kappa2=0", "--bind", "logDisc=0"]
    code, doc = run_json(capsys, "x0n", "--N", "35", *binds)
    assert code == 0
    num = doc["numeric"]
    assert num["values"]["total"] is None
    assert num["unbound"]["total"] == ["Lbar2"]
    code, doc = run_json(capsys, "x0n", "--N", "35", *binds, "--bind", "Lbar2=0")
    assert isinstance(doc["numeric"]["values"]["total"], float)
    code, _, err = run(capsys, "x0n", "--N", "35", "--bind", "kappa0")
    assert code == 2


def test_fiber_round_trip(tmp_path, capsys):
    code, text, _ = run(capsys, "x0n-fiber", "--N", "35", "--prime", "5")
    assert code == 0
    path = tmp_path / "fiber.json"
    path.write_text(text)
    code, doc = run_json(capsys, "fiber-analyze", "--input", str(path), "--genus", "3", "--degree", "48")
    assert code == 0
    assert doc["a_p"] == "-1/16"
    assert doc["stats"] == {"r": 6, "u": 2, "l": 1, "c": 3}
    assert doc["geom_bound"]["holds"] is True


def test_fiber_analyze_errors(tmp_path, capsys):
    _, text, _ = run(capsys, "x0n-fiber", "--N", "35", "--prime", "5")
    doc = json.loads(text)
    no_sections = dict(doc)
    no_sections.pop("sections")
    p = tmp_path / "nosec.json"
    p.write_text(json.dumps(no_sections))
    code, _, err = run(capsys, "fiber-analyze", "--input", str(p), "--sections-required")
    assert code == 2

    island = {"G2", "H2"}
    split = dict(doc, crossings=[c for c in doc["crossings"] if len(island & set(c[:2])) != 1])
    p = tmp_path / "disc.json"
    p.write_text(json.dumps(split))
    code, _, err = run(capsys, "fiber-analyze", "--input", str(p))
    assert code == 2
    assert "fiber graph not connected" in err

    p = tmp_path / "broken.json"
    p.write_text('{\n "prime_norm": 5,\n')
    code, _, err = run(capsys, "fiber-analyze", "--input", str(p))
    assert code == 2 and "line" in err

    code, _, err = run(capsys, "fiber-analyze", "--input", str(tmp_path / "missing.json"))
    assert code == 2


def test_fermat(capsys):
    code, doc = run_json(capsys, "fermat", "--p", "5")
    assert code == 0
    assert (doc["b_p_raw"], doc["b_p_envelope"], doc["flag"]) == ("29015/1", "78125/2", "OK")
    code, doc = run_json(capsys, "fermat", "--p", "7")
    assert (doc["b_p_raw"], doc["b_p_envelope"], doc["flag"]) == ("341600/1", "823543/2", "OK")
    code, _, _ = run(capsys, "fermat", "--p", "9")
    assert code == 2


def test_xn(capsys):
    code, doc = run_json(capsys, "xn", "--N", "175")
    assert code == 0
    p5 = doc["per_prime"][0]
    assert (p5["r"], p5["s"], p5["m_p"], p5["b_p_envelope"]) == (30, 56, 25, "21025/56")
    code, _, _ = run(capsys, "xn", "--N", "30")
    assert code == 2


def test_green_selftest(capsys):
    code, doc = run_json(capsys, "green-selftest", "--n", "8", "--trials", "100", "--seed", "7")
    assert code == 0 and doc["passed"]
    assert floats_outside_numeric(doc) == []
    code, _, _ = run(capsys, "green-selftest", "--n", "1")
    assert code == 2


def test_green_selftest_reports_failing_seed(capsys, monkeypatch):
    import arakelov.cli as cli
    from arakelov.green_discrete import IdentityReport

    monkeypatch.setattr(cli, "verify_green_identities", lambda *a: IdentityReport([("forced", False)]))
    code, doc = run_json(capsys, "green-selftest", "--n", "3", "--trials", "2", "--seed", "1")
    assert code == 3
    assert [f["first_failure"] for f in doc["failures"]] == ["forced", "forced"]
    assert doc["failures"][0]["seed"] == doc["instances"][0]["seed"]


def test_x0n_internal_failure_exit_code(capsys, monkeypatch):
    import arakelov.cli as cli

    real = cli.x0n_report

    def tampered(N, primes=None):
        rep = real(N, primes)
        rep.extras["checks"].append(("tampered", False))
        return rep

    monkeypatch.setattr(cli, "x0n_report", tampered)
    code, _, _ = run(capsys, "x0n", "--N", "35")
    assert code == 3


def test_sweep_respects_cap(capsys, monkeypatch):
    monkeypatch.setenv("ARAKELOV_MAX_N", "60")
    code, doc = run_json(capsys, "sweep", "--max-n", "500")
    assert code == 0
    assert [r["N"] for r in doc["levels"]] == [35, 55]


@pytest.mark.parametrize(
    "argv",
    [
        ["x0n", "--N", "35", "--format", "json"],
        ["green-selftest", "--n", "6", "--trials", "5", "--seed", "3", "--format", "json"],
    ],
)
def test_subprocess_output_is_byte_identical(argv):
    cmd = [sys.executable, "-m", "arakelov", *argv]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second and first


def test_table_output(capsys):
    code, out, _ = run(capsys, "x0n", "--N", "35")
    assert code == 0
    assert "-1/16" in out and "[PASS]" in out and "[FAIL]" not in out
