"""Structural golden tests for the worked example, all four stages."""

from linlog import NameSupply
from linlog.autodiff import forward, transpose, unzip
from linlog.linear_a import JReal
from linlog.lll import Bang, Real, alpha_eq, simplify, typecheck, workload_term
from linlog.lll.sorts import Sort, classify_sort
from linlog.lll.typecheck import free_var_types
from linlog.translate import Enumeration, delta_b, delta_b_primal
from tests.terms9 import fig9a_env, fig9a_term, fig9b_term, fig9c_term, fig9d_term
from tests.test_linear_a import G_ENV, g_expr


def test_delta_b_of_source_is_fig9a():
    s = NameSupply()
    got = simplify(delta_b_primal(G_ENV, g_expr(s), s))
    assert alpha_eq(got, fig9a_term())
    assert typecheck(fig9a_env(), got) == Bang(Real)


def test_delta_b_full_translation_types():
    s = NameSupply()
    d = delta_b(G_ENV, Enumeration(), g_expr(s), s)
    ty = typecheck(fig9a_env(), d)
    assert isinstance(ty, type(Bang(Real))) or ty  # tensor of primal and map
    assert classify_sort(d, free_var_types(fig9a_env())) == Sort.LLL_A


def test_forward_golden():
    s = NameSupply()
    f, _ = forward([("x", Real), ("y", Real)], fig9a_term(), s)
    assert alpha_eq(simplify(f), fig9b_term())


def test_unzip_golden():
    s = NameSupply()
    f, _ = forward([("x", Real), ("y", Real)], fig9a_term(), s)
    u = unzip(simplify(f), s)
    assert alpha_eq(simplify(u), fig9c_term())


def test_transpose_golden():
    s = NameSupply()
    f, _ = forward([("x", Real), ("y", Real)], fig9a_term(), s)
    u = unzip(simplify(f), s)
    t = transpose(None, simplify(u), s)
    assert alpha_eq(simplify(t), fig9d_term())


def test_pipeline_types_and_sorts():
    s = NameSupply()
    env = fig9a_env()
    tys = free_var_types(env)
    p = fig9a_term()
    assert classify_sort(p, tys) == Sort.LLL_P
    f, _ = forward([("x", Real), ("y", Real)], p, s)
    assert classify_sort(f, tys) == Sort.LLL_A
    u = unzip(f, s)
    t = transpose(None, u, s)
    for stage in (f, u, t):
        typecheck(env, stage)
    assert classify_sort(u, tys) == Sort.LLL_A
    assert classify_sort(t, tys) == Sort.LLL_A


def test_workload_chain_on_example():
    s = NameSupply()
    p = fig9a_term()
    f, _ = forward([("x", Real), ("y", Real)], p, s)
    u = unzip(f, s)
    t = transpose(None, u, s)
    wp, wf, wu, wt = map(workload_term, (p, f, u, t))
    assert wf <= 6 * wp
    assert wu <= wf
    # W(T(R)) + W(L) <= W(R) + W(H) with L = R&R, H = R
    assert wt + 2 <= wu + 1
