import pytest

from linlog import NameSupply
from linlog.linear_a import (
    AddDot, Dup, JOne, JProd, JReal, ScaleDot, TanTupIntro2, VarPair, ZeroDot,
)
from linlog.lll import (
    Abs, App, Bang, BangVal, Lolli, Numeral, One, PBang, Real, TensorPair,
    Tensor, Top, TopVal, TypingEnv, Var, With, WithPair, Zero, alpha_eq,
    normalize, typecheck,
)
from linlog.lll.machine import run
from linlog.lll.sorts import Sort, classify_sort
from linlog.lll.typecheck import free_var_types
from linlog.oracle import basis, flatten_value
from linlog.translate import (
    Enumeration, delta, mk_add, mk_fuse, mk_scale, mk_split, mk_zero,
    primal_type, tangent_type,
)

RR = With(Real, Real)


def test_tangent_type():
    assert tangent_type(JReal) == Real
    assert tangent_type(JOne) == Top
    assert tangent_type(JProd(JProd(JReal, JReal), JOne)) == With(RR, Top)


def test_primal_type():
    assert primal_type(JReal) == Real
    assert primal_type(JOne) == One
    assert primal_type(JProd(JReal, JOne)) == Tensor(Bang(Real), Bang(One))


def test_mk_zero():
    assert mk_zero(With(Real, Top)) == WithPair(Zero(), TopVal())


def test_mk_add_scalar_pair():
    out = normalize(App(mk_add(Real), WithPair(Numeral(2.0), Numeral(3.0))))
    assert out.result == Numeral(5.0)


def test_mk_scale_compound():
    t = App(App(mk_scale(RR), Numeral(2.0)),
            WithPair(Numeral(1.0), Numeral(4.0)))
    v, _ = run(t)
    assert flatten_value(v) == [2.0, 8.0]


def test_mk_split_identity_shape():
    s = mk_split({0}, [Real, Real])
    assert typecheck(TypingEnv(), s) == Lolli(RR, RR)
    v, _ = run(App(s, WithPair(Numeral(1.0), Numeral(2.0))))
    assert flatten_value(v) == [1.0, 2.0]


def test_mk_split_empty_index():
    s = mk_split(set(), [Real, Real])
    ty = typecheck(TypingEnv(), s)
    assert ty == Lolli(RR, With(Top, RR))


def test_fuse_after_split_is_identity_on_basis():
    comps = [Real, Real, Real]
    idx = {1}
    split, fuse = mk_split(idx, comps), mk_fuse(idx, comps)
    from linlog.lll.types import with_tuple_type
    h = with_tuple_type(comps)
    for b in basis(h):
        v, _ = run(App(fuse, App(split, b)))
        want, _ = run(b)
        assert flatten_value(v) == flatten_value(want)


def test_delta_varpair():
    s = NameSupply()
    d = delta({"x": JReal}, Enumeration.of(("y'", JReal)),
              VarPair("x", "y'"), s)
    # (!x, par(\u. u))
    assert isinstance(d, TensorPair)
    assert d.left == BangVal(Var("x"))
    from linlog.lll import PVar
    fn = d.right.right
    assert alpha_eq(fn, Abs(PVar("u", Real), Var("u")))


def test_delta_dup():
    s = NameSupply()
    d = delta({}, Enumeration.of(("y'", JReal)), Dup("y'"), s)
    fn = d.right.right
    assert isinstance(fn.body, WithPair)
    assert fn.body.left == fn.body.right


def test_delta_zerodot_add_scale_type_and_values():
    s = NameSupply()
    env = TypingEnv.of(PBang("c", Real))
    d = delta({"c": JReal}, Enumeration.of(("a'", JReal)),
              ScaleDot("c", "a'"), s)
    ty = typecheck(env, d)
    assert ty == Tensor(Bang(One), With(One, Lolli(Real, Real)))
    d0 = delta({}, Enumeration(), ZeroDot(JProd(JReal, JOne)), s)
    assert typecheck(TypingEnv(), d0) == \
        Tensor(Bang(One), With(One, Lolli(Top, With(Real, Top))))


def test_delta_output_is_mixed_sort_and_safe():
    from linlog.gen import jax_cases
    from linlog.lll.workload import is_safe
    for c in jax_cases(25, 99, "linear-a"):
        d = delta(c.penv, Enumeration(tuple(c.theta)), c.expr, c.supply)
        env = TypingEnv.of(*[PBang(x, primal_type(t))
                             for x, t in sorted(c.penv.items())])
        tys = free_var_types(env)
        typecheck(env, d)
        assert classify_sort(d, tys) == Sort.LLL_A
        assert is_safe(d, tys)


def test_delta_tantup_respects_enumeration_order():
    s = NameSupply()
    # enumeration reversed relative to the tuple
    d = delta({}, Enumeration.of(("b'", JReal), ("a'", JReal)),
              TanTupIntro2("a'", "b'"), s)
    fn = d.right.right
    v, _ = run(App(fn, WithPair(Numeral(5.0), Numeral(7.0))))
    # input (b', a') = (5, 7); output must be (a', b') = (7, 5)
    assert flatten_value(v) == [7.0, 5.0]
