import pytest

from linlog import NameSupply
from linlog.autodiff import (
    EMPTY_RENAMING, Renaming, SectionEnv, forward, nu, rename_apply,
    rename_pattern, rename_project, transpose, transpose_f, transpose_t,
    unzip, unzip_decompose,
)
from linlog.lll import (
    Abs, App, BangVal, Numeral, PBang, PVar, PWith, PlusDot, Real, TensorPair,
    TimesDot, Top, TopVal, TypingEnv, Var, With, WithPair, Zero, alpha_eq,
    para, typecheck, workload_term,
)
from linlog.lll.machine import Flops, apply_value, eval_term, run
from linlog.oracle import basis_values, flatten_value

RR = With(Real, Real)


def pvar(n):
    return PVar(n, Real)


def test_forward_of_variable():
    s = NameSupply()
    f, enum = forward([("x", Real)], BangVal(Var("x")), s)
    assert isinstance(f, TensorPair)
    fn = f.right.right
    assert isinstance(fn, Abs) and fn.body == Var(fn.pat.name)


def test_forward_of_numeral():
    s = NameSupply()
    f, _ = forward([], BangVal(Numeral(3.0)), s)
    assert f.left == BangVal(Numeral(3.0))
    assert f.right.right.body == Zero()


def test_rename_project_examples():
    # p = <<x, y>, u>, alpha = {x -> x1, y -> y1}
    p = PWith(PWith(pvar("x"), pvar("y")), pvar("u"))
    alpha = Renaming((("x", "x1"), ("y", "y1")))
    assert rename_project(alpha, p) == PWith(pvar("x1"), pvar("y1"))
    assert rename_pattern(alpha, p) == \
        PWith(PWith(pvar("x1"), pvar("y1")), pvar("u"))
    # empty domain: a fresh top variable
    out = rename_project(EMPTY_RENAMING, p, NameSupply())
    assert isinstance(out, PVar) and out.ty == Top


def test_rename_apply_preserves_workload():
    m = App(PlusDot(), WithPair(Var("a"), Var("b")))
    alpha = Renaming((("a", "c"),))
    out = rename_apply(alpha, m)
    assert out == App(PlusDot(), WithPair(Var("c"), Var("b")))
    assert workload_term(out) == workload_term(m)


def test_nu_examples():
    p = PWith(PWith(pvar("x"), pvar("y")), pvar("u"))
    a1 = Renaming((("x", "x1"), ("y", "y1")))
    a2 = Renaming((("x", "x2"),))
    out = nu(p, a1, a2)
    expect = WithPair(
        WithPair(App(PlusDot(), WithPair(Var("x1"), Var("x2"))), Var("y1")),
        Zero())
    assert out == expect
    # both empty: the zero vector
    assert nu(p, EMPTY_RENAMING, EMPTY_RENAMING) == \
        WithPair(WithPair(Zero(), Zero()), Zero())
    # disjoint domains: no addition emitted
    a3 = Renaming((("y", "y3"),))
    assert workload_term(nu(p, a2, a3)) == workload_term(
        WithPair(WithPair(Var("x2"), Var("y3")), Zero()))


def test_transpose_t_variable():
    s = NameSupply()
    q, body, used = transpose_t(SectionEnv(), pvar("u"), Var("u"), s, {})
    assert used == {"u"}
    assert body == Var(q.name)


def test_transpose_t_zero_and_top():
    s = NameSupply()
    q, body, used = transpose_t(SectionEnv(), pvar("u"), Zero(), s, {})
    assert body == TopVal() and used == set()
    q2, body2, _ = transpose_t(SectionEnv(), pvar("u"), TopVal(), s, {})
    assert body2 == TopVal()


def test_transpose_f_plus_and_scale():
    s = NameSupply()
    tp = transpose_f(SectionEnv(), PlusDot(), s, {})
    assert isinstance(tp, Abs) and isinstance(tp.body, WithPair)
    scale = App(TimesDot(), Var("x"))
    assert transpose_f(SectionEnv(), scale, s, {"x": Real}) == scale


def test_transpose_f_partial_use_inserts_zero():
    # T(\<x, y>. x) = \q. let x = q in <x, 0>
    s = NameSupply()
    f = Abs(PWith(pvar("x"), pvar("y")), Var("x"))
    tf = transpose_f(SectionEnv(), f, s, {})
    env = TypingEnv()
    from linlog.lll import Lolli
    assert typecheck(env, tf) == Lolli(Real, RR)
    v, _ = run(App(tf, Numeral(3.0)))
    assert flatten_value(v) == [3.0, 0.0]


def test_transpose_f_contraction_becomes_addition():
    # T(\<u, u'>. <<u, u>, u'>): cotangents for the two copies of u add up
    s = NameSupply()
    f = Abs(PWith(pvar("u"), pvar("u2")),
            WithPair(WithPair(Var("u"), Var("u")), Var("u2")))
    tf = transpose_f(SectionEnv(), f, s, {})
    vf, _ = run(tf)
    got = [flatten_value(apply_value(vf, b, Flops()))
           for b in basis_values(With(RR, Real))]
    assert got == [[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]


def test_unzip_decompose_literal_pair():
    s = NameSupply()
    r = TensorPair(BangVal(Numeral(1.0)), para(Abs(PVar("u", Top), TopVal())))
    ctx, p, f = unzip_decompose(r)
    assert ctx.frames == ()
    assert p == r.left and f == r.right.right


def test_unzip_idempotent():
    from linlog.gen import lll_p_cases
    for c in lll_p_cases(15, 5):
        f, _ = forward(c.sigma, c.term, c.supply)
        u1 = unzip(f, c.supply)
        u2 = unzip(u1, c.supply)
        assert alpha_eq(u1, u2)


def test_transpose_equiv_with_and_without_unzip():
    from linlog.gen import lll_p_cases
    from linlog.oracle import EquivConfig, equiv_check
    from linlog.lll import PBang
    cfg = EquivConfig(sample_count=4)
    for c in lll_p_cases(10, 6):
        f, _ = forward(c.sigma, c.term, c.supply)
        t1 = transpose(None, f, c.supply)
        t2 = transpose(None, unzip(f, c.supply), c.supply)
        env = TypingEnv.of(*[PBang(x, e) for x, e in c.sigma])
        ty = typecheck(env, t1)
        assert typecheck(env, t2) == ty
        assert equiv_check(ty, t1, t2, env, cfg).equivalent


def test_nu_rejects_codomain_overlap():
    from linlog.autodiff import CodomainOverlap
    p = PWith(pvar("x"), pvar("y"))
    a1 = Renaming((("x", "z"),))
    a2 = Renaming((("y", "z"),))
    with pytest.raises(CodomainOverlap):
        nu(p, a1, a2)


def test_transpose_drops_dead_section_binding():
    # let par(f) = par(F) in G with f unused: the transpose removes F
    from linlog.lll import Lolli, para_pattern, let_
    s = NameSupply()
    g = Abs(pvar("u"), Var("u"))
    f_term = Abs(pvar("w"), App(App(TimesDot(), Var("c")), Var("w")))
    t = let_(para_pattern(PVar("f", Lolli(Real, Real))), para(f_term), g)
    out = transpose_f(SectionEnv(), t, s, {"c": Real})
    # the dead binding is gone entirely
    from linlog.lll.terms import free_vars
    assert "c" not in free_vars(out)


def test_transpose_keeps_live_section_binding():
    from linlog.lll import Lolli, para_pattern, let_
    s = NameSupply()
    g = Abs(pvar("u"), App(Var("f"), Var("u")))
    f_term = Abs(pvar("w"), App(App(TimesDot(), Var("c")), Var("w")))
    t = let_(para_pattern(PVar("f", Lolli(Real, Real))), para(f_term), g)
    out = transpose_f(SectionEnv(), t, s, {"c": Real})
    from linlog.lll.reduce import substitute
    from linlog.lll.terms import free_vars
    assert "c" in free_vars(out)
    vf, _ = run(substitute(out, PVar("c", Real), Numeral(3.0)))
    got = [flatten_value(apply_value(vf, b, Flops()))
           for b in basis_values(Real)]
    assert got == [[3.0]]
