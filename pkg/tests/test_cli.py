import subprocess
import sys

import pytest

from linbasis.cli import main
from linbasis.fixtures import catalogue, derivations
from linbasis.graph import to_web_with_order
from linbasis.rewrite import Derivation, DerivationStep, RuleSet, format_derivation


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_generate_counts(capsys):
    code, out, _ = run_cli(capsys, "generate", "--n", "4")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "phase1 n=4 mode=p4free"
    assert len(lines) - 1 == 52


def test_generate_all_graphs(capsys):
    code, out, _ = run_cli(capsys, "generate", "--n", "3", "--all-graphs")
    assert code == 0
    assert len(out.splitlines()) - 1 == 8


def test_generate_budget_guard(capsys):
    code, _, err = run_cli(capsys, "generate", "--n", "9", "--all-graphs")
    assert code == 3


def test_search_small(capsys, tmp_path):
    code, out, _ = run_cli(
        capsys, "search", "--n", "5", "--rules", "builtin:sm", "--ckpt", str(tmp_path)
    )
    assert code == 0
    assert "residual: 0" in out


def test_search_stable_set_matches_default(capsys):
    code_a, out_a, _ = run_cli(capsys, "search", "--n", "5", "--rules", "builtin:sm")
    code_b, out_b, _ = run_cli(capsys, "search", "--n", "5", "--rules", "builtin:sm", "--stable-set")
    assert code_a == code_b == 0
    strip = lambda text: [l for l in text.splitlines() if not l.startswith("search ")]
    assert strip(out_a) == strip(out_b)


def test_search_long_run_guard(capsys):
    code, _, err = run_cli(capsys, "search", "--n", "9")
    assert code == 3
    assert "long-run" in err


def test_basis_small(capsys):
    code, out, _ = run_cli(capsys, "basis", "--n", "4")
    assert code == 0
    lines = out.splitlines()
    assert "M 3" in lines and "M 4" in lines
    assert sum(1 for l in lines if l.startswith("m3_")) == 1
    assert sum(1 for l in lines if l.startswith("m4_")) == 1


def test_basis_all_graphs(capsys):
    code, out, _ = run_cli(capsys, "basis", "--n", "5", "--all-graphs")
    assert code == 0
    assert sum(1 for l in out.splitlines() if l.startswith("g5_")) == 16


def test_check_valid_inference(capsys):
    code, out, _ = run_cli(
        capsys,
        "check",
        "--lhs", "x & (y | z)",
        "--rhs", "(x & y) | z",
    )
    assert code == 0
    assert "valid: true" in out
    assert "trivial: false" in out
    assert "logically_minimal: true" in out
    assert "instance of s: true" in out
    assert "instance of m: false" in out
    assert "self_dual: true" in out


def test_check_mix(capsys):
    code, out, _ = run_cli(capsys, "check", "--lhs", "x & y", "--rhs", "x | y")
    assert code == 0
    assert "trivial: true" in out
    assert "trivial_at: x, y" in out


def test_check_invalid_with_expectation(capsys):
    code, out, _ = run_cli(
        capsys, "check", "--lhs", "x | y", "--rhs", "x & y", "--expect-valid"
    )
    assert code == 1
    assert "valid: false" in out
    assert "countermodel: {" in out


def test_check_countermodel_matches_appendix(capsys):
    code, out, _ = run_cli(
        capsys,
        "check",
        "--lhs", "(z | (w & w')) & (x | y | y') & (x' | z')",
        "--rhs", "(z & (x | y)) | ((w | y') & ((w' & x') | z'))",
    )
    assert code == 0
    assert "valid: false" in out
    assert "countermodel: {x', y', z}" in out


def test_check_parse_error(capsys):
    code, _, err = run_cli(capsys, "check", "--lhs", "x &", "--rhs", "x")
    assert code == 2


def test_check_eq1_full_verdict(capsys):
    # the 8-variable flagship: valid, non-trivial, minimal, independent, self-dual
    code, out, _ = run_cli(
        capsys,
        "check",
        "--lhs", "(z | (w & w')) & ((x & x') | ((y | y') & z'))",
        "--rhs", "(z & (x | y)) | ((w | y') & ((w' & x') | z'))",
    )
    assert code == 0
    assert "valid: true" in out
    assert "trivial: false" in out
    assert "logically_minimal: true" in out
    assert "instance of s: false" in out
    assert "instance of m: false" in out
    assert "self_dual: true" in out


def test_convert_formula(capsys):
    code, out, _ = run_cli(capsys, "convert", "--formula", "(w & (x & (y | z)))")
    assert code == 0
    n, value = out.split()
    assert n == "4"
    assert int(value) == 31  # all pairs except {y, z} (bit 5)


def test_convert_graph(capsys):
    code, out, _ = run_cli(capsys, "convert", "--graph", "1 0")
    assert code == 0
    assert out.strip() == "x0"


def test_convert_roundtrip(capsys):
    code, out, _ = run_cli(capsys, "convert", "--formula", "x & (y | z)")
    code2, out2, _ = run_cli(capsys, "convert", "--graph", out.strip())
    assert code2 == 0
    assert out2.strip() == "(x0 & (x1 | x2))"


def test_convert_non_cograph(capsys):
    # P4 as "4 N": edges (0,1),(1,2),(2,3) -> bits 0, 2, 5
    code, _, err = run_cli(capsys, "convert", "--graph", "4 37")
    assert code == 1
    assert "P4" in err or "induced" in err


def test_verify_derivation(capsys, tmp_path):
    cat = catalogue()
    dfx = derivations()["tenvar_from_eq1"]
    start = to_web_with_order(dfx.start, dfx.variable_order)
    steps = tuple(
        DerivationStep(rule, to_web_with_order(f, dfx.variable_order))
        for rule, f in dfx.steps
    )
    d = Derivation(10, start, steps)
    path = tmp_path / "derivation.txt"
    path.write_text(format_derivation(d))
    rules_path = tmp_path / "rules.txt"
    RuleSet.from_rules(
        "file-rules",
        [
            ("s", cat["switch"].webs),
            ("m", cat["medial"].webs),
            ("eq1", cat["eq1"].webs),
        ],
        "file",
    ).to_file(rules_path)
    code, out, _ = run_cli(capsys, "verify-derivation", "--file", str(path), "--rules", str(rules_path))
    assert code == 0
    assert out.splitlines()[-1] == "derivation: ok"
    # with plain switch/medial the eq1 step fails and the exit code says so
    code2, out2, _ = run_cli(capsys, "verify-derivation", "--file", str(path), "--rules", "builtin:sm")
    assert code2 == 1
    assert "step 1" in out2 and "FAIL" in out2


def test_env_var_checkpoint_root(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("LINBASIS_CKPT_DIR", str(tmp_path))
    code, out, _ = run_cli(capsys, "search", "--n", "3", "--rules", "builtin:none")
    assert code == 0
    assert (tmp_path / "p4free-n3" / "phase1.txt").exists()


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "linbasis.cli", "convert", "--graph", "1 0"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "x0"


def test_usage_error_exit_code():
    proc = subprocess.run(
        [sys.executable, "-m", "linbasis.cli", "frobnicate"], capture_output=True
    )
    assert proc.returncode == 2
