import json
import subprocess
import sys

import pytest

from qserre.cli import main

from conftest import A2, G2


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_triangular(capsys):
    code, out, _ = run(capsys, "verify", "lemma2", "--m", -2)
    assert code == 0 and "lemma2: zero" in out


def test_serre_p_basis(capsys, cartan_file):
    code, out, _ = run(capsys, "verify", "serre", "--cartan", cartan_file(A2), "--i", 0, "--j", 1,
                       "--family", "p-basis", "--n", 1, "--oracle", 3)
    assert code == 0 and "numeric oracle (3 trials): zero" in out


def test_constant_ones_nonzero_with_witness(capsys, cartan_file):
    code, out, _ = run(capsys, "verify", "serre", "--cartan", cartan_file(A2),
                       "--family", "constant-ones", "--format", "json")
    data = json.loads(out)
    assert code == 3
    assert data["report"]["result"] == "nonzero"
    assert data["report"]["witness"]["monomial"] == "1"


def test_json_echoes_resolved_config(capsys, cartan_file):
    code, out, _ = run(capsys, "verify", "serre", "--cartan", cartan_file(A2), "--family", "taylor",
                       "--window", 8, "--format", "json")
    data = json.loads(out)
    assert code == 0
    cfg = data["config"]
    assert cfg["window"] == 8 and cfg["rho"] == "1/2" and cfg["i"] == 0 and cfg["workers"] == 1
    assert data["report"]["mode"] == "truncated"
    assert data["report"]["window"]["W"] == 8


def test_truncated_text_states_window(capsys, cartan_file):
    _, out, _ = run(capsys, "verify", "serre", "--cartan", cartan_file(A2), "--family", "taylor",
                    "--window", 6)
    assert "verified on truncation window W=6" in out


def test_undefined_exit(capsys, cartan_file):
    code, out, _ = run(capsys, "verify", "serre", "--cartan", cartan_file(A2), "--family", "phi-psi",
                       "--which", "phi", "--window", 6)
    assert code == 4 and "undefined" in out


def test_cartan_symmetrize(capsys, cartan_file):
    code, out, _ = run(capsys, "cartan", "symmetrize", "--cartan", cartan_file(G2), "--format", "json")
    assert code == 0 and json.loads(out)["d"] == [3, 1]


def test_basis_check_phi(capsys):
    code, out, _ = run(capsys, "basis", "check", "--family", "phi", "--n", 3, "--window", 30)
    assert code == 0 and "verified on window [-30, 30]" in out


def test_basis_list(capsys):
    code, out, _ = run(capsys, "basis", "list", "--format", "json")
    assert code == 0 and "taylor" in json.loads(out)["family_kinds"]


def test_hypothesis(capsys, cartan_file):
    code, out, _ = run(capsys, "verify", "hypothesis", "--variant", "constr2", "--cartan", cartan_file(A2),
                       "--family", "taylor", "--eps", 1, "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["hypothesis"]["common_domain"] is True
    code, _, _ = run(capsys, "verify", "hypothesis", "--cartan", cartan_file(A2),
                     "--family", "general-offdiag", "--coeffs=-1:1", "--C", "1")
    assert code == 3


def test_system1(capsys, cartan_file):
    code, out, _ = run(capsys, "verify", "system1", "--cartan", cartan_file(G2), "--i", 1, "--j", 0,
                       "--family", "taylor")
    assert code == 0 and "holds on window" in out
    code, _, _ = run(capsys, "verify", "system1", "--cartan", cartan_file(G2), "--family", "constant-ones")
    assert code == 3


def test_verify_expanded_p1_explicit(capsys):
    assert run(capsys, "verify", "eq5", "--a-ij", -2, "--b-ii", 4, "--b-ij", -4, "--d-i", 2)[0] == 0
    assert run(capsys, "verify", "eq5", "--a-ij", -2, "--b-ii", 4, "--b-ij", -2, "--d-i", 2)[0] == 3


@pytest.mark.parametrize("content, argv_tail, code, needle", [
    ('{"a": [[2, -1], [-1, 2]', ["--family", "p-basis"], 5, "malformed JSON"),
    ('{"a": [[2, 1], [-1, 2]]}', ["--family", "p-basis"], 6, "invalid generalized Cartan"),
    ('{"a": [[2, -1, -1], [-2, 2, -1], [-1, -1, 2]]}', ["--family", "p-basis"], 6, "no symmetrizer"),
    ('{"a": [[2, -1], [-1, 2]]}', ["--family", "bogus"], 7, "unknown family kind"),
    ('{"a": [[2, -1], [-1, 2]]}', ["--family", "p-basis", "--i", "4"], 8, "out of range"),
])
def test_bad_inputs(capsys, tmp_path, content, argv_tail, code, needle):
    p = tmp_path / "c.json"
    p.write_text(content)
    got, _, err = run(capsys, "verify", "serre", "--cartan", str(p), *argv_tail)
    assert got == code and needle in err


def test_missing_file(capsys):
    code, _, err = run(capsys, "cartan", "validate", "--cartan", "/nonexistent.json")
    assert code == 5 and "cannot read" in err


def test_exit_codes_stable_across_workers(capsys, cartan_file):
    path = cartan_file(A2)
    codes = {run(capsys, "verify", "serre", "--cartan", path, "--family", fam, "--workers", w)[0]
             for fam in ("constant-ones",) for w in (1, 2)}
    assert codes == {3}


def test_module_entry_point(cartan_file):
    proc = subprocess.run([sys.executable, "-m", "qserre.cli", "cartan", "validate", "--cartan",
                           cartan_file(A2)], capture_output=True, text=True)
    assert proc.returncode == 0 and "valid" in proc.stdout
