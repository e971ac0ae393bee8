import math

import pytest

from linlog import NameSupply
from linlog.linear_a import Scalar
from linlog.lll import (
    Abs, App, Numeral, PVar, PWith, PlusDot, Real, Top, TopVal, TypingEnv,
    Var, With, WithPair, Zero, normalize, typecheck, workload_type,
)
from linlog.lll.machine import VNum, VWith, run
from linlog.oracle import (
    EquivConfig, GradResult, Verdict, basis, basis_values, equiv_check,
    finite_diff_grad, flatten_value, inner_product, mk_dual, mk_undual,
    naive_transpose, run_grad, term_to_value,
)
from tests.terms9 import fig9a_env, fig9a_term
from tests.test_linear_a import g_grad, g_value

RR = With(Real, Real)


def test_basis_shapes():
    assert basis(Real) == [Numeral(1.0)]
    assert basis(Top) == [TopVal()]
    b = basis(RR)
    assert len(b) == 2 == workload_type(RR)
    vals = [flatten_value(term_to_value(t)) for t in b]
    assert vals == [[1.0, 0.0], [0.0, 1.0]]


def test_basis_gram_matrix_is_identity():
    h = With(RR, Top)
    ip = inner_product(h)
    bs = basis(h)
    for i, vi in enumerate(bs):
        for j, vj in enumerate(bs):
            from linlog.lll.terms import TensorPair
            out = normalize(App(ip, TensorPair(vi, vj))).result
            expect = 1.0 if i == j else 0.0
            assert out == Numeral(expect) or (expect == 0.0 and out == Zero())


def test_inner_product_scalar():
    from linlog.lll.terms import TensorPair
    out = normalize(App(inner_product(Real),
                        TensorPair(Numeral(2.0), Numeral(3.0)))).result
    assert out == Numeral(6.0)


def test_dual_undual_roundtrip_on_basis():
    h = RR
    dual, undual = mk_dual(h), mk_undual(h)
    for v in basis(h):
        roundtrip = App(undual, App(dual, v))
        got, _ = run(roundtrip)
        assert flatten_value(got) == pytest.approx(flatten_value(term_to_value(v)))


def test_equiv_reflexive_and_distinguishing():
    m = Abs(PVar("u", Real), Var("u"))
    n = Abs(PVar("u", Real),
            App(PlusDot(), WithPair(Var("u"), Zero())))
    k = Abs(PVar("u", Real), App(PlusDot(), WithPair(Var("u"), Var("u"))))
    ty =到 = None
    from linlog.lll import Lolli
    ty = Lolli(Real, Real)
    assert equiv_check(ty, m, m, TypingEnv())
    assert equiv_check(ty, m, n, TypingEnv())  # u + 0 == u, exact on basis
    bad = equiv_check(ty, m, k, TypingEnv())
    assert not bad.equivalent and bad.counterexample is not None


def test_naive_transpose_identity():
    s = NameSupply()
    p = PVar("u", Real)
    q, body = naive_transpose(p, Var("u"), s)
    # feeding the unit cotangent returns the unit vector
    val, _ = run(App(Abs(q, body), Numeral(1.0)))
    assert flatten_value(val) == [1.0]


def test_naive_transpose_contraction():
    # U = <<u, u>, u'> under p = <u, u'>: basis cotangents recover the
    # additive contraction + passthrough matrix
    s = NameSupply()
    p = PWith(PVar("u", Real), PVar("u2", Real))
    u = WithPair(WithPair(Var("u"), Var("u")), Var("u2"))
    q, body = naive_transpose(p, u, s)
    lam = Abs(q, body)
    rows = []
    from linlog.oracle import basis_values
    h = With(With(Real, Real), Real)
    for b in basis_values(h):
        from linlog.lll.machine import apply_value, Flops
        v = apply_value(term_to_value(lam), b, Flops())
        rows.append(flatten_value(v))
    # transpose of [[1,0],[1,0],[0,1]]
    assert rows == [pytest.approx([1.0, 0.0]), pytest.approx([1.0, 0.0]),
                    pytest.approx([0.0, 1.0])]


def test_finite_diff_on_g():
    p = fig9a_term()
    theta = [("x", Real), ("y", Real)]
    g = finite_diff_grad(p, theta, [Scalar(0.0), Scalar(1.0)])
    assert g == pytest.approx([1.0, 0.0], abs=1e-5)
    g2 = finite_diff_grad(p, theta, [Scalar(0.5), Scalar(2.0)])
    assert g2 == pytest.approx(list(g_grad(0.5, 2.0)), abs=1e-5)


def test_run_grad_tuf_and_tf_agree():
    p = fig9a_term()
    theta = [("x", Real), ("y", Real)]
    for (x, y) in [(0.0, 1.0), (0.5, 2.0), (-1.5, 0.25)]:
        r1 = run_grad(p, theta, [Scalar(x), Scalar(y)], pipeline="tuf")
        r2 = run_grad(p, theta, [Scalar(x), Scalar(y)], pipeline="tf")
        assert r1.primal.value == pytest.approx(g_value(x, y))
        gx, gy = g_grad(x, y)
        assert r1.gradient[0].value == pytest.approx(gx)
        assert r1.gradient[1].value == pytest.approx(gy)
        assert r2.gradient[0].value == pytest.approx(r1.gradient[0].value)
        assert r2.gradient[1].value == pytest.approx(r1.gradient[1].value)
        assert r1.flops <= r1.workload_bound
        assert r2.flops <= r2.workload_bound


def test_run_grad_jacobian_for_tuple_output():
    import math
    from linlog import NameSupply
    from linlog.lll import BangVal, TensorPair, Var, bang_let, prim, prim_app
    # P = !(sin(x), mul(x, y)): Jacobian is [[cos x, 0], [y, x]]
    def bang(x):
        return BangVal(Var(x))
    p = bang_let("a", Real, prim_app(prim("sin"), [bang("x")]),
                 bang_let("b", Real, prim_app(prim("mul2"), [bang("x"), bang("y")]),
                          BangVal(TensorPair(bang("a"), bang("b")))))
    theta = [("x", Real), ("y", Real)]
    x0, y0 = 0.4, 1.7
    res = run_grad(p, theta, [Scalar(x0), Scalar(y0)], "tuf",
                   supply=NameSupply())
    assert res.jacobian_t is not None and len(res.jacobian_t) == 2
    row_a = [v.value for v in res.jacobian_t[0]]
    row_b = [v.value for v in res.jacobian_t[1]]
    assert row_a == pytest.approx([math.cos(x0), 0.0])
    assert row_b == pytest.approx([y0, x0])
    assert res.flops <= res.workload_bound
