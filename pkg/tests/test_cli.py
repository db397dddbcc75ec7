import io
import json
import subprocess
import sys

from dlecorr.cli import main

from conftest import SIGS

FG = str(SIGS / "fg.json")
FREGE = str(SIGS / "frege.json")
HEYTING = str(SIGS / "heyting.json")


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    rc = main(list(argv), stdout=out, stderr=err)
    return rc, out.getvalue(), err.getvalue()


def test_synthesize_fs2():
    rc, out, _ = run("--sig", FG, "synthesize", "dia q -> box p <= box (q -> p)")
    assert rc == 0
    assert "X |- o Y > o Z\n" in out and "X |- o (Y > Z)" in out


def test_global_flags_after_subcommand():
    a = run("--sig", FG, "synthesize", "dia q -> box p <= box (q -> p)")
    b = run("synthesize", "dia q -> box p <= box (q -> p)", "--sig", FG)
    assert a == b


def test_classify_reports_witness():
    rc, out, _ = run("--sig", HEYTING, "classify", "p => (q => r) <= (p => q) => (p => r)")
    assert rc == 0
    assert "class: very-restricted-right" in out
    assert "eps: (1,1,d)" in out and "omega: {p<q}" in out


def test_classify_with_eps():
    rc, out, _ = run("--sig", HEYTING, "classify", "p => (q => r) <= (p => q) => (p => r)", "--eps", "p=1,q=1,r=1")
    assert rc == 0 and "eps: (1,1,1)" in out


def test_alba_trivial():
    rc, out, _ = run("alba", "p <= p")
    assert rc == 0 and "[top <= top]" in out


def test_alba_trace_has_rule_lines():
    rc, out, _ = run("--sig", FG, "--trace", "alba", "dia q -> box p <= box (q -> p)")
    assert rc == 0 and "first-approximation\t" in out


def test_alba_script(tmp_path):
    script = tmp_path / "s.json"
    script.write_text(json.dumps([["first-approximation"], ["approximate", 0, 1], ["LA", 1, [0]], ["RAR", "p"]]))
    rc, out, _ = run("--sig", str(SIGS / "modal.json"), "alba", "dia box p <= box dia p",
                     "--strategy", "interactive-script", "--script", str(script))
    assert rc == 0 and "route: script" in out


def test_not_analytic_exit_code():
    rc, _, err = run("--sig", str(SIGS / "modal.json"), "synthesize", "box dia p <= dia box p")
    assert rc == 1 and err.startswith("error[E200]")


def test_parse_error_exit_code():
    rc, _, err = run("classify", "p <=")
    assert rc == 2 and err.startswith("error[E103]")


def test_missing_signature_file(tmp_path):
    rc, _, err = run("--sig", str(tmp_path / "nope.json"), "classify", "p <= p")
    assert rc == 2 and err.startswith("error[E101]")


def test_bad_signature(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text('{"connectives": [{"name": "x", "family": "H", "arity": 1, "order_type": [1]}]}')
    rc, _, err = run("--sig", str(f), "classify", "p <= p")
    assert rc == 2 and err.startswith("error[E102]")


def test_usage_error(capsys):
    assert main(["frobnicate"]) == 2
    assert "error[E100]" in capsys.readouterr().err


def test_rule_files(tmp_path):
    rules = tmp_path / "r.txt"
    rules.write_text("# transitivity\n\nX |- (Y * Z) >> W\n----\nX |- Z >> (Y >> W)\n")
    rc, out, _ = run("--sig", FREGE, "rule2ineq", str(rules))
    assert rc == 0 and "<=" in out
    rc, out, _ = run("--sig", FREGE, "check-analytic", str(rules))
    assert rc == 0 and "analytic" in out
    rc, out, _ = run("--sig", FREGE, "oracle-check", "(p => q) * (q => r) <= p => r", str(rules))
    assert rc == 0 and "disagree: 0" in out


def test_oracle_check_detects_wrong_rule(tmp_path):
    rules = tmp_path / "r.txt"
    rules.write_text("X |- Y\n---\nX * X |- Y\n")
    rc, out, err = run("--sig", FREGE, "oracle-check", "(p => q) * (q => r) <= p => r", str(rules))
    assert rc == 1 and err.startswith("error[E203]")


def test_check_analytic_failure(tmp_path):
    rules = tmp_path / "r.txt"
    rules.write_text("X |- Y\n---\nY |- X\n")
    rc, _, err = run("--sig", FREGE, "check-analytic", str(rules))
    assert rc == 1 and err.startswith("error[E204]")


def test_latex_output():
    rc, out, _ = run("--sig", FG, "--latex", "synthesize", "dia q -> box p <= box (q -> p)")
    assert rc == 0 and "\\DisplayProof" in out


def test_output_is_deterministic():
    args = ("--sig", HEYTING, "synthesize", "p => (q => r) <= (p => q) => (p => r)")
    assert run(*args) == run(*args)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dlecorr.cli", "alba", "p <= p"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "[top <= top]" in proc.stdout
