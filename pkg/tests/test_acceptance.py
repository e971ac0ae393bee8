"""Acceptance suite: one test per criterion, at full scale.

Each test prints a PASS/FAIL line (visible with -s or in the captured
output) and asserts zero violations at the stated tolerances.
"""

import time

import pytest

from linlog import checks
from linlog.oracle import EquivConfig

CFG = EquivConfig(sample_count=16)


def _report(result, limit=None, elapsed=None):
    extra = f"   [{elapsed:.1f}s]" if elapsed is not None else ""
    print(f"\n{result.line()}{extra}")
    assert result.violations == 0, result.line()
    if limit is not None and elapsed is not None:
        assert elapsed < limit, f"{result.name} took {elapsed:.1f}s (limit {limit}s)"


def test_criterion_1_running_example_gradient():
    t0 = time.time()
    r = checks.check_running_example(CFG)
    _report(r, limit=10.0, elapsed=time.time() - t0)


def test_criterion_2_golden_structural_tests():
    from linlog import NameSupply
    from linlog.autodiff import forward, transpose, unzip
    from linlog.lll import Real, alpha_eq, simplify
    from linlog.translate import delta_b_primal
    from tests.terms9 import fig9a_term, fig9b_term, fig9c_term, fig9d_term
    from tests.test_linear_a import G_ENV, g_expr

    s = NameSupply()
    bad = []
    if not alpha_eq(simplify(delta_b_primal(G_ENV, g_expr(s), s)), fig9a_term()):
        bad.append("delta_b")
    f, _ = forward([("x", Real), ("y", Real)], fig9a_term(), s)
    fs = simplify(f)
    if not alpha_eq(fs, fig9b_term()):
        bad.append("forward")
    u = simplify(unzip(fs, s))
    if not alpha_eq(u, fig9c_term()):
        bad.append("unzip")
    t = simplify(transpose(None, u, s))
    if not alpha_eq(t, fig9d_term()):
        bad.append("transpose")
    r = checks.CheckResult("golden-structural-tests", 4, len(bad),
                           ",".join(bad))
    _report(r)


def test_criterion_3_flop_bound():
    t0 = time.time()
    r = checks.check_flop_bound(1000, seed=11)
    _report(r, limit=60.0, elapsed=time.time() - t0)


def test_criterion_4_workload_theorems():
    t0 = time.time()
    for r in (checks.check_workload_delta(500, 21),
              checks.check_workload_forward(500, 22),
              checks.check_workload_unzip(500, 23),
              checks.check_workload_transpose(500, 24)):
        _report(r)
    print(f"  (workload theorems took {time.time() - t0:.1f}s)")


def test_criterion_5_commutation_squares():
    t0 = time.time()
    for r in (checks.check_commute_forward(200, 31, CFG),
              checks.check_commute_unzip(200, 32, CFG),
              checks.check_commute_transpose(200, 33, CFG)):
        _report(r)
    elapsed = time.time() - t0
    print(f"  (commutation squares took {elapsed:.1f}s)")
    assert elapsed < 300.0


def test_criterion_6_transpose_is_matrix_transpose():
    r = checks.check_matrix_transpose(200, 41, CFG)
    _report(r)


def test_criterion_7_skip_unzipping():
    r = checks.check_skip_unzip(100, 51, CFG)
    _report(r)
    r2 = checks.check_gradients(60, 52, CFG)
    _report(r2)


def test_criterion_8_metatheory_smoke():
    for r in (checks.check_metatheory(120, 61),
              checks.check_safety_closure(120, 62),
              checks.check_typing_closure(150, 63)):
        _report(r)
