from __future__ import annotations

import json
import os
import subprocess
import sys

import pytest

from cohjump.cli import EXIT_ERROR, EXIT_JUMP, EXIT_OK, main
from cohjump.config import Config, ConfigError, load_config
from cohjump.errors import ModelError, ShapeMismatch
from cohjump.modelfile import dumps, loads, model_to_doc
from support import GOLDEN_DIR, fixture_path

GOLDEN = {
    "toy-jump-verdict-q0.json": (["jump-verdict", "toy", "--degree", "0", "--order", "3"], EXIT_JUMP),
    "trivial-jump-verdict-q1.json": (["jump-verdict", "trivial", "--degree", "1", "--order", "3"], EXIT_OK),
    "toy-oracle-compare-q0.json": (["oracle-compare", "toy", "--degree", "0"], EXIT_OK),
}


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for key in list(os.environ):
        if key.startswith("COHJUMP_"):
            monkeypatch.delenv(key)


def run(capsys, *argv):
    """Run the CLI in-process; a fixture name in the model position becomes its path."""
    argv = list(argv)
    if len(argv) > 1 and argv[0] != "models" and fixture_path(argv[1]).exists():
        argv[1] = str(fixture_path(argv[1]))
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


TOY = "toy"


# -- golden reports --------------------------------------------------------------

@pytest.mark.parametrize("golden", sorted(GOLDEN))
def test_golden_structured_report(capsys, golden):
    argv, expected_code = GOLDEN[golden]
    code, out, _ = run(capsys, *argv, "--format", "structured")
    assert code == expected_code
    assert out == (GOLDEN_DIR / golden).read_text(encoding="utf-8")


def test_golden_contents(capsys):
    doc = json.loads((GOLDEN_DIR / "toy-jump-verdict-q0.json").read_text())
    assert doc["result"]["verdict"] == "Jump{ExtensionObstruction(0), order 1}"
    doc = json.loads((GOLDEN_DIR / "trivial-jump-verdict-q1.json").read_text())
    assert doc["result"]["verdict"] == "NoJumpDetected(3)"
    doc = json.loads((GOLDEN_DIR / "toy-oracle-compare-q0.json").read_text())
    assert (doc["result"]["oracle"]["dim_at_zero"], doc["result"]["oracle"]["generic_dim"]) == (1, 0)
    assert doc["result"]["agree"]


@pytest.mark.parametrize("argv", [
    ["validate", "dgla-adjoint"],
    ["hodge-report", "iwasawa-cotangent"],
    ["mc-solve", "dgla-obstructed", "--xi", "0"],
    ["extend", "order-two", "--degree", "0", "--class", "0"],
    ["obstructions", "iwasawa-canonical", "--degree", "1"],
    ["jump-verdict", "kodaira-tangent", "--degree", "1"],
    ["oracle-compare", "iwasawa-tangent", "--degree", "2"],
])
def test_structured_round_trip_and_determinism(capsys, argv):
    _, first, _ = run(capsys, *argv, "--format", "structured")
    _, second, _ = run(capsys, *argv, "--format", "structured")
    assert first == second
    assert dumps(json.loads(first)) == first


# -- exit codes and text output ------------------------------------------------------

def test_exit_codes(capsys):
    assert run(capsys, "jump-verdict", TOY, "--degree", "1", "--order", "2")[0] == EXIT_JUMP
    assert run(capsys, "jump-verdict", "iwasawa-parallelizable", "--degree", "1")[0] == EXIT_OK
    # oracle-compare reports, it does not branch
    assert run(capsys, "oracle-compare", TOY, "--degree", "1")[0] == EXIT_OK
    assert run(capsys, "jump-verdict", TOY, "--degree", "5")[0] == EXIT_ERROR
    assert run(capsys)[0] == EXIT_ERROR


def test_text_output(capsys):
    code, out, _ = run(capsys, "jump-verdict", TOY, "--degree", "1", "--order", "2")
    assert code == EXIT_JUMP
    assert "Jump{ExactnessObstruction(0), order 1}" in out
    _, out, _ = run(capsys, "hodge-report", "iwasawa-tangent")
    assert "h^0 = 3" in out
    _, out, _ = run(capsys, "mc-solve", "dgla-obstructed", "--xi", "0", "--order", "3")
    assert "obstructed at order 2" in out
    _, out, _ = run(capsys, "extend", "trivial", "--degree", "1", "--class", "0")
    assert "extends through order 6" in out
    _, out, _ = run(capsys, "obstructions", "order-two", "--degree", "0")
    assert "first nonzero order: 2; harmonic route: 2" in out


def test_mc_solve_obstruction_factor(capsys):
    _, out, _ = run(capsys, "mc-solve", "dgla-obstructed", "--xi", "0", "--order", "2",
                    "--obstruction-factor", "1.0", "--format", "structured")
    half = json.loads(run(capsys, "mc-solve", "dgla-obstructed", "--xi", "0", "--order", "2",
                          "--format", "structured")[1])
    full = json.loads(out)
    assert full["result"]["obstruction_norms"][1] == pytest.approx(2 * half["result"]["obstruction_norms"][1])
    assert run(capsys, "mc-solve", "dgla-obstructed", "--xi", "0", "--obstruction-factor", "0.7")[0] == EXIT_ERROR


def test_explicit_coefficients(capsys):
    code, out, _ = run(capsys, "extend", "trivial", "--degree", "1", "--class", "1,0,0,0", "--order", "2",
                       "--format", "structured")
    assert code == EXIT_OK
    assert json.loads(out)["result"]["base_class"][0] == [1.0, 0.0]


def test_usage_errors(capsys):
    code, _, err = run(capsys, "extend", TOY, "--degree", "0", "--class", "3")
    assert code == EXIT_ERROR and "out of range" in err
    code, _, err = run(capsys, "extend", TOY, "--degree", "0", "--class", "1,2")
    assert code == EXIT_ERROR and "expected 1 coefficients" in err
    code, _, err = run(capsys, "extend", TOY, "--degree", "0", "--class", "abc")
    assert code == EXIT_ERROR and "comma-separated" in err
    code, _, err = run(capsys, "jump-verdict", TOY)
    assert code == EXIT_ERROR and "--degree" in err
    code, _, err = run(capsys, "mc-solve", TOY, "--xi", "0")
    assert code == EXIT_ERROR and "dgla section" in err
    code, _, err = run(capsys, "validate", "/nonexistent/model.json")
    assert code == EXIT_ERROR and "No such file" in err
    code, _, err = run(capsys, "jump-verdict", "dgla-obstructed", "--degree", "1")
    assert code == EXIT_ERROR and "exactly one" in err


def test_order_beyond_truncation(capsys):
    code, _, err = run(capsys, "jump-verdict", "order-two-gauged", "--degree", "0", "--order", "9")
    assert code == EXIT_ERROR and "OrderExceedsTruncation" in err
    # polynomial series are zero-padded
    assert run(capsys, "jump-verdict", TOY, "--degree", "0", "--order", "9")[0] == EXIT_JUMP


# -- configuration -----------------------------------------------------------------

def test_show_config_defaults(capsys):
    code, out, _ = run(capsys, "--show-config")
    assert code == EXIT_OK
    assert "rank_tol = 1e-10" in out
    assert "order = 6" in out


def test_config_precedence(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"order": 4, "samples": 5, "seed": 3}))
    monkeypatch.setenv("COHJUMP_SAMPLES", "7")
    code, out, _ = run(capsys, "jump-verdict", TOY, "--degree", "0", "--config", str(cfg), "--seed", "9",
                       "--format", "structured")
    assert code == EXIT_JUMP
    prov = json.loads(out)["provenance"]
    assert prov["config"]["order"] == 4  # file
    assert prov["config"]["samples"] == 7  # environment beats file
    assert prov["seed"] == 9  # flag beats file
    assert prov["order_checked"] == 4


def test_config_errors(tmp_path, capsys, monkeypatch):
    assert run(capsys, "--show-config", "--rank-tol", "2")[0] == EXIT_ERROR
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": 1}))
    code, _, err = run(capsys, "--show-config", "--config", str(bad))
    assert code == EXIT_ERROR and "unknown settings" in err
    monkeypatch.setenv("COHJUMP_ORDER", "zero")
    assert run(capsys, "--show-config")[0] == EXIT_ERROR


def test_load_config_direct():
    assert load_config(environ={}) == Config()
    assert load_config(flags={"order": 3}, environ={"COHJUMP_ORDER": "5"}).order == 3
    with pytest.raises(ConfigError):
        Config(order=0)
    with pytest.raises(ConfigError):
        Config(modulus_low=0.5, modulus_high=0.1)


# -- model files --------------------------------------------------------------------

def _toy_doc():
    return json.loads(fixture_path("toy").read_text())


def test_fixture_files_round_trip():
    for path in sorted(fixture_path("toy").parent.glob("*.json")):
        text = path.read_text()
        assert dumps(model_to_doc(loads(text))) == text, path.name


def test_duplicate_triplets_are_summed():
    doc = _toy_doc()
    doc["operator_series"]["coeffs"][0]["0"] = [[0, 0, 0.25, 0.0], [0, 0, 0.75, 1.0]]
    m = loads(json.dumps(doc))
    assert m.series(1).coeff(1, 0)[0, 0] == pytest.approx(1.0 + 1.0j)


def test_modelfile_errors():
    doc = _toy_doc()
    doc["operator_series"]["coeffs"][0]["0"] = [[1, 0, 1.0, 0.0]]
    with pytest.raises(ShapeMismatch, match="outside shape"):
        loads(json.dumps(doc))
    doc = _toy_doc()
    doc["extra"] = 1
    with pytest.raises(ModelError, match="unknown top-level"):
        loads(json.dumps(doc))
    doc = _toy_doc()
    doc["format_version"] = 99
    with pytest.raises(ModelError, match="format_version"):
        loads(json.dumps(doc))
    doc = _toy_doc()
    doc["operator_series"]["coeffs"][0]["0"] = [[0, 0, "1"]]
    with pytest.raises(ModelError):
        loads(json.dumps(doc))
    with pytest.raises(ModelError, match="not valid JSON"):
        loads("{")


def test_two_series_sources_rejected():
    adj = json.loads(fixture_path("dgla-adjoint").read_text())
    adj["operator_series"] = {"order": 1, "coeffs": [{}], "polynomial": False}
    with pytest.raises(ModelError, match="exactly one"):
        loads(json.dumps(adj))


def test_models_build_and_list(tmp_path, capsys):
    code, out, _ = run(capsys, "models", "list")
    assert code == EXIT_OK and "toy" in out.split()
    target = tmp_path / "toy.json"
    assert run(capsys, "models", "build", "toy", "-o", str(target))[0] == EXIT_OK
    assert target.read_text() == fixture_path("toy").read_text()
    code, out, _ = run(capsys, "models", "build", "toy")
    assert out == fixture_path("toy").read_text()
    assert run(capsys, "models", "build", "no-such-fixture")[0] == EXIT_ERROR


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cohjump", "jump-verdict", str(fixture_path("toy")),
                           "--degree", "0", "--order", "3"], capture_output=True, text=True)
    assert proc.returncode == EXIT_JUMP
    assert "ExtensionObstruction(0)" in proc.stdout


def test_warnings_land_in_report(capsys):
    # sample moduli above 1 trigger the oracle's range warning
    code, out, _ = run(capsys, "oracle-compare", TOY, "--degree", "0", "--modulus-low", "2",
                       "--modulus-high", "3", "--format", "structured")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert any("> 1" in w for w in doc["warnings"])
    # repeated warnings are reported once
    assert len(doc["warnings"]) == len(set(doc["warnings"]))
