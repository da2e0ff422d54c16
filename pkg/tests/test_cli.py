import json
import subprocess
import sys

import jsonschema
import pytest

from carleman_bpm import reports
from carleman_bpm.cli import ENV_OUTPUT_DIR, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def validate(command, text):
    data = json.loads(text)
    jsonschema.validate(data, reports.load_schema(command))
    return data


def test_expand_latex_lists_i1(capsys):
    code, out, _ = run(capsys, "expand", "--n", "4", "--format", "latex")
    assert code == 0
    assert out.startswith("\\documentclass")
    assert out.rstrip().endswith("\\end{document}")
    for piece in (r"4\ell_x\partial_x^{3}w", r"4\ell_x^{3}\partial_xw", r"6\ell_{xx}\partial_x^{2}w", r"6\ell_x^{2}\ell_{xx}w"):
        assert piece in out


def test_expand_zero_is_w(capsys):
    code, out, _ = run(capsys, "expand", "--n", "0")
    data = validate("expand", out)
    assert code == 0
    assert data["expansion"] == [{"r": 0, "s": 0, "m": 0, "coeff": "1/1"}]


def test_expand_30_self_check(capsys):
    code, out, _ = run(capsys, "expand", "--n", "30", "--format", "json")
    data = validate("expand", out)
    assert code == 0 and data["pass"]


def test_coeffs_n4(capsys):
    code, out, _ = run(capsys, "coeffs", "--n", "4")
    data = validate("coeffs", out)
    assert code == 0
    row = next(r for r in data["diagonal"] if r["m"] == 2)
    assert row["bpg"] == row["rewrite"] == row["closed"] == "24/1"
    assert [e["contribution"] for e in data["ledger"]["entries"]] == ["-36/1", "48/1", "-6/1", "36/1", "-18/1", "0/1"]


def test_coeffs_ledger_latex(capsys):
    code, out, _ = run(capsys, "coeffs", "--n", "4", "--format", "latex")
    assert code == 0
    assert r"\Rightarrow$ Total = $24$" in out


@pytest.mark.parametrize("n,cross", [(7, {(0, 3, 0): "-210/1"}), (6, {})])
def test_coeffs_cross(capsys, n, cross):
    code, out, _ = run(capsys, "coeffs", "--n", str(n))
    data = validate("coeffs", out)
    assert code == 0
    got = {(c["r"], c["s"], c["m"]): c["rewrite"] for c in data["cross"]}
    assert got == cross


@pytest.mark.parametrize("bound", ["2", "40"])
def test_identities_pass(capsys, bound):
    code, out, _ = run(capsys, "identities", "--max-n", bound)
    assert code == 0 and validate("identities", out)["pass"]


@pytest.mark.parametrize("bound", ["abc", "1", "-3"])
def test_identities_bad_bound(capsys, bound):
    with pytest.raises(SystemExit) as exc:
        main(["identities", "--max-n", bound])
    assert exc.value.code == 2
    assert "max-n" in capsys.readouterr().err


def test_verify_n2(capsys):
    code, out, _ = run(capsys, "verify", "--n", "2", "--alpha", "1")
    data = validate("verify", out)
    assert code == 0 and data["pass"]
    assert data["lambda_star"] is not None


def test_verify_remark_configuration(capsys):
    code, out, _ = run(capsys, "verify", "--n", "4", "--alpha", "-1")
    data = validate("verify", out)
    assert code == 0 and data["config"]["alpha"] == "-1/1"


def test_verify_csv(capsys):
    code, out, _ = run(capsys, "verify", "--n", "3", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0].startswith("lambda,")
    assert len(lines) == 8


def test_verify_alpha_zero_is_config_error(capsys):
    code, _, err = run(capsys, "verify", "--alpha", "0")
    assert code == 2 and "alpha" in err


def test_caputo_power_rule(capsys):
    code, out, _ = run(capsys, "caputo", "--power-rule")
    data = validate("caputo", out)
    assert code == 0
    assert data["power_rule"] and all(t["pass"] for t in data["power_rule"])
    assert "composition" not in data or not data["composition"]


def test_caputo_all(capsys):
    code, out, _ = run(capsys, "caputo")
    data = validate("caputo", out)
    assert code == 0 and data["pass"]
    assert data["negative_control"]["detected"]
    assert data["negative_control"]["report"]["initial_checks"]["d23_uhat_at_zero"] is None


def test_determinism(capsys):
    _, a, _ = run(capsys, "verify", "--n", "2")
    _, b, _ = run(capsys, "verify", "--n", "2")
    assert a == b


def test_output_file_and_env(tmp_path, monkeypatch, capsys):
    dest = tmp_path / "out.json"
    assert main(["coeffs", "--n", "5", "-o", str(dest)]) == 0
    assert json.loads(dest.read_text())["n"] == 5
    monkeypatch.setenv(ENV_OUTPUT_DIR, str(tmp_path / "reports"))
    assert main(["expand", "--n", "3", "--format", "latex"]) == 0
    assert (tmp_path / "reports" / "expand.tex").read_text().startswith("\\documentclass")
    assert capsys.readouterr().out == ""


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 5}))
    _, out, _ = run(capsys, "expand", "--config", str(cfg))
    assert json.loads(out)["n"] == 5
    _, out, _ = run(capsys, "expand", "--config", str(cfg), "--n", "3")
    assert json.loads(out)["n"] == 3
    _, out, _ = run(capsys, "expand")
    assert json.loads(out)["n"] == 4


def test_config_errors(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    code, _, err = run(capsys, "expand", "--config", str(cfg))
    assert code == 2 and "bogus" in err
    code, _, _ = run(capsys, "expand", "--config", str(tmp_path / "missing.json"))
    assert code == 2


def test_schema_dump(capsys):
    code, out, _ = run(capsys, "--schema")
    assert code == 0 and set(json.loads(out)) == set(reports.COMMANDS)
    code, out, _ = run(capsys, "coeffs", "--schema")
    assert code == 0 and json.loads(out)["type"] == "object"


def test_no_command_is_usage_error(capsys):
    code, _, err = run(capsys)
    assert code == 2 and "usage" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "carleman_bpm", "coeffs", "--n", "7"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert '"-210/1"' in proc.stdout
