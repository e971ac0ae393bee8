import subprocess
import sys

import pytest

from linlog.cli import main

G = "programs/g.lina"


def run_cli(*args):
    import io
    from contextlib import redirect_stdout
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(list(args))
    return code, buf.getvalue()


def test_typecheck():
    code, out = run_cli("typecheck", G)
    assert code == 0
    assert "(R; 1)" in out


def test_eval():
    code, out = run_cli("eval", G, "--point", "0.0 1.0")
    assert code == 0
    assert "value = 1" in out


def test_grad_forced_values():
    code, out = run_cli("grad", G, "--point", "0.0 1.0")
    assert code == 0
    assert "primal = 1" in out
    assert "grad   = (1, 0)" in out


def test_grad_pipelines_agree():
    _, out1 = run_cli("grad", G, "--point", "0.7 1.3", "--format", "machine")
    _, out2 = run_cli("grad", G, "--point", "0.7 1.3", "--pipeline", "tf",
                      "--format", "machine")
    g1 = [l for l in out1.splitlines() if l.startswith("grad=")]
    g2 = [l for l in out2.splitlines() if l.startswith("grad=")]
    assert g1 == g2


def test_machine_section_deterministic():
    _, out1 = run_cli("grad", G, "--point", "0.5 2.0", "--format", "machine")
    _, out2 = run_cli("grad", G, "--point", "0.5 2.0", "--format", "machine")
    assert out1 == out2


def test_workload_inequalities():
    code, out = run_cli("workload", G)
    assert code == 0
    assert out.count("PASS") >= 4
    assert "FAIL" not in out


def test_compare():
    code, out = run_cli("compare", G, "--point", "0.5 2.0")
    assert code == 0
    assert "finite diff" in out


def test_check_file():
    code, out = run_cli("check", G)
    assert code == 0
    assert "skip-unzipping" in out


def test_usage_error_exit_2():
    code = subprocess.run(
        [sys.executable, "-m", "linlog.cli", "grad", G],
        capture_output=True).returncode
    assert code == 2


def test_missing_file_exit_2():
    code = subprocess.run(
        [sys.executable, "-m", "linlog.cli", "typecheck", "no-such-file.lina"],
        capture_output=True).returncode
    assert code == 2


def test_stdin_input():
    text = open(G).read()
    proc = subprocess.run(
        [sys.executable, "-m", "linlog.cli", "eval", "-", "--point", "0 1"],
        input=text.encode(), capture_output=True)
    assert proc.returncode == 0
    assert b"value = 1" in proc.stdout


def test_eval_and_jvp_on_lll_file():
    code, out = run_cli("typecheck", "programs/pair_out.lll")
    assert code == 0
    code, out = run_cli("eval", "programs/pair_out.lll", "--point", "0.5 2.0")
    assert code == 0 and "value" in out
    code, out = run_cli("jvp", "programs/pair_out.lll",
                        "--point", "0.5 2.0", "--tangent", "1 0")
    assert code == 0
    # directional derivative along x: (cos 0.5, y) = (0.8775.., 2)
    assert "0.877583" in out and "2" in out


def test_check_random_machine_deterministic():
    _, out1 = run_cli("check", "--random", "8", "--seed", "4",
                      "--format", "machine")
    _, out2 = run_cli("check", "--random", "8", "--seed", "4",
                      "--format", "machine")
    assert out1 == out2
