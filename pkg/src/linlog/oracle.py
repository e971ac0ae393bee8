"""Verification layer: bases, duals, equivalence testing, gradients.

With-sequence types are finite-dimensional vector spaces; their
canonical bases make linear maps comparable exactly.  The equivalence
tester approximates the extensional relation between terms: exact at
sequence types and for linear maps (by basis application), sampled at
everything else, and it reports which of the two it did.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from linlog.fresh import NameSupply
from linlog.linear_a.values import NPair, NumTuple, Scalar, UnitTup
from linlog.lll import machine
from linlog.lll.machine import (
    Flops, VBang, VNum, VPair, VTop, VUnit, VWith, Value, apply_value,
    eval_term, values_close,
)
from linlog.lll.terms import (
    Abs, App, BangVal, Numeral, Pattern, PBang, PTensor, PUnit, PVar, PWith,
    Term, TensorPair, TimesDot, TopVal, Var, WithPair, Zero, para_pattern,
    pattern_type,
)
from linlog.lll.types import (
    Bang, LType, Lolli, One, Real, Tensor, Top, With, is_ground, is_with_seq,
)
from linlog.lll.typecheck import TypingEnv, typecheck
from linlog.translate import add_app, mk_zero, scale_app


class NotWithSeq(Exception):
    pass


@dataclass(frozen=True)
class EquivConfig:
    scalar_rel_tol: float = 1e-9
    fd_step: float = 1e-6
    fd_tol: float = 1e-5
    sample_count: int = 16
    rng_seed: int = 2024


# ------------------------------------------------------------------- basis

def _basis0(h: LType) -> list[Term]:
    match h:
        case x if x is Real:
            return [Numeral(1.0)]
        case x if x is Top:
            return []
        case With(l, r):
            out = [WithPair(v, mk_zero(r)) for v in _basis0(l)]
            out += [WithPair(mk_zero(l), v) for v in _basis0(r)]
            return out
    raise AssertionError(h)


def basis(h: LType) -> list[Term]:
    """Canonical basis; one vector per scalar dimension.  The top type
    spans a zero-dimensional space, so inside compound types it
    contributes nothing, while the bare type keeps its single point so
    maps out of it can still be probed."""
    if not is_with_seq(h):
        raise NotWithSeq(repr(h))
    if h is Top:
        return [TopVal()]
    return _basis0(h)


def basis_values(h: LType) -> list[Value]:
    return [term_to_value(b) for b in basis(h)]


def dimension_basis_values(h: LType) -> list[Value]:
    """One value per scalar dimension; empty at the top type.  Use this
    for matrix materialization, `basis_values` for probing."""
    return [term_to_value(b) for b in _basis0(h)]


def inner_product(h: LType, supply: NameSupply | None = None) -> Term:
    if not is_with_seq(h):
        raise NotWithSeq(repr(h))
    supply = supply or NameSupply()
    x, y = supply.fresh("x"), supply.fresh("y")
    pat = PTensor(PVar(x, h), PVar(y, h))
    match h:
        case t if t is Real:
            return Abs(pat, App(App(TimesDot(), Var(x)), Var(y)))
        case t if t is Top:
            return Abs(pat, Zero())
        case With(l, r):
            x1, x2 = supply.fresh("x"), supply.fresh("x")
            y1, y2 = supply.fresh("y"), supply.fresh("y")
            pat = PTensor(PWith(PVar(x1, l), PVar(x2, r)),
                          PWith(PVar(y1, l), PVar(y2, r)))
            body = App(machine_plus(), WithPair(
                App(inner_product(l, supply), TensorPair(Var(x1), Var(y1))),
                App(inner_product(r, supply), TensorPair(Var(x2), Var(y2)))))
            return Abs(pat, body)
    raise AssertionError(h)


def machine_plus():
    from linlog.lll.terms import PlusDot
    return PlusDot()


def mk_dual(h: LType, supply: NameSupply | None = None) -> Term:
    supply = supply or NameSupply()
    a, b = supply.fresh("h"), supply.fresh("h")
    return Abs(PVar(a, h),
               Abs(PVar(b, h),
                   App(inner_product(h, supply), TensorPair(Var(a), Var(b)))))


def mk_undual(h: LType, supply: NameSupply | None = None) -> Term:
    """Reconstruction of a vector from its dual functional; replicates
    the functional once per basis vector, so deliberately not safe."""
    supply = supply or NameSupply()
    f = supply.fresh("f")
    terms = [scale_app(h, App(Var(f), v), v, supply) for v in basis(h)]
    if not terms:
        body = mk_zero(h)
    else:
        body = terms[0]
        for t in terms[1:]:
            body = add_app(h, body, t, supply)
    return Abs(PVar(f, Lolli(h, Real)), body)


def naive_transpose(p: Pattern, u: Term,
                    supply: NameSupply | None = None) -> tuple[Pattern, Term]:
    """The reference transpose: undual_L (\\p. dual_H q U).  Returns the
    fresh cotangent pattern q and the term, with q's variables free."""
    supply = supply or NameSupply()
    from linlog.autodiff import SectionEnv, _t_type
    l = pattern_type(p)
    h = _t_type(u, SectionEnv(), dict(_pattern_types(p)))
    qpat, qterm = _fresh_tree(h, supply)
    functional = Abs(p, App(App(mk_dual(h, supply), qterm), u))
    return qpat, App(mk_undual(l, supply), functional)


def _pattern_types(p: Pattern):
    from linlog.lll.terms import pattern_var_types
    return pattern_var_types(p)


def _fresh_tree(h: LType, supply: NameSupply):
    match h:
        case With(l, r):
            pl, tl = _fresh_tree(l, supply)
            pr, tr = _fresh_tree(r, supply)
            return PWith(pl, pr), WithPair(tl, tr)
        case _:
            n = supply.fresh("q")
            return PVar(n, h), Var(n)


# ------------------------------------------------------------ value bridges

def term_to_value(t: Term) -> Value:
    v, _ = machine.run(t)
    return v


def numtuple_to_primal_value(v: NumTuple) -> Value:
    match v:
        case Scalar(x):
            return VNum(x)
        case NPair(l, r):
            return VPair(VBang(numtuple_to_primal_value(l)),
                         VBang(numtuple_to_primal_value(r)))
        case _:
            return VUnit()


def numtuple_to_tangent_value(v: NumTuple) -> Value:
    match v:
        case Scalar(x):
            return VNum(x)
        case NPair(l, r):
            return VWith(numtuple_to_tangent_value(l),
                         numtuple_to_tangent_value(r))
        case _:
            return VTop()


def value_to_numtuple(v: Value) -> NumTuple:
    match v:
        case VNum(x):
            return Scalar(x)
        case VUnit() | VTop():
            return UnitTup
        case VPair(VBang(l), VBang(r)):
            return NPair(value_to_numtuple(l), value_to_numtuple(r))
        case VPair(l, r) | VWith(l, r):
            return NPair(value_to_numtuple(l), value_to_numtuple(r))
        case VBang(i):
            return value_to_numtuple(i)
    raise machine.MachineError(f"{v!r} is not a numeric value")


def flatten_value(v: Value) -> list[float]:
    match v:
        case VNum(x):
            return [x]
        case VUnit() | VTop():
            return []
        case VPair(l, r) | VWith(l, r):
            return flatten_value(l) + flatten_value(r)
        case VBang(i):
            return flatten_value(i)
    raise machine.MachineError(f"{v!r} has no numeric leaves")


def random_value_of(ty: LType, rng: random.Random) -> Value:
    """A random closed value of a ground type; scalars uniform in [-2,2]
    with fixed probes mixed in."""
    match ty:
        case t if t is Real:
            return VNum(rng.choice([0.0, 1.0, -1.0])
                        if rng.random() < 0.2 else rng.uniform(-2.0, 2.0))
        case t if t is One:
            return VUnit()
        case t if t is Top:
            return VTop()
        case Tensor(l, r):
            return VPair(random_value_of(l, rng), random_value_of(r, rng))
        case With(l, r):
            return VWith(random_value_of(l, rng), random_value_of(r, rng))
        case Bang(i):
            return VBang(random_value_of(i, rng))
    raise NotWithSeq(f"cannot sample a value of {ty!r}")


def random_linear_map(l: LType, h: LType, rng: random.Random,
                      supply: NameSupply | None = None) -> Term:
    """A random matrix encoded as a term of type L -o H."""
    supply = supply or NameSupply()
    pat, leaves = _tree_with_leaves(l, supply)
    ins = [n for n, t in leaves if t is Real]

    def build(ty):
        match ty:
            case t if t is Real:
                terms = [App(App(TimesDot(), Numeral(rng.uniform(-2.0, 2.0))),
                             Var(n)) for n in ins]
                if not terms:
                    return Zero()
                out = terms[0]
                for t2 in terms[1:]:
                    out = App(machine_plus(), WithPair(out, t2))
                return out
            case t if t is Top:
                return TopVal()
            case With(a, b):
                return WithPair(build(a), build(b))
        raise AssertionError(ty)

    return Abs(pat, build(h))


def _tree_with_leaves(h: LType, supply: NameSupply):
    match h:
        case With(l, r):
            pl, vl = _tree_with_leaves(l, supply)
            pr, vr = _tree_with_leaves(r, supply)
            return PWith(pl, pr), vl + vr
        case _:
            n = supply.fresh("i")
            return PVar(n, h), [(n, h)]


# ------------------------------------------------------------- equivalence

@dataclass
class Verdict:
    equivalent: bool
    exact: bool
    counterexample: tuple | None = None

    def __bool__(self):
        return self.equivalent


def _close_env(env: TypingEnv, rng: random.Random, supply: NameSupply):
    """Sample one machine environment for the free patterns."""
    values: dict[str, Value] = {}
    exact = True
    for p in env.entries:
        match p:
            case PBang(x, ty):
                values[x] = random_value_of(ty, rng)
            case PVar(x, ty) if is_ground(ty):
                values[x] = random_value_of(ty, rng)
            case PWith(PUnit(), PVar(f, Lolli(dl, dh))) \
                    if is_with_seq(dl) and is_with_seq(dh):
                tm = random_linear_map(dl, dh, rng)
                values[f] = term_to_value(tm)
                exact = False
            case _:
                raise NotWithSeq(f"cannot close environment entry {p!r}")
    return values, exact


def _compare(ty: LType, a: Value, b: Value, cfg: EquivConfig,
             rng: random.Random, flops: Flops):
    tol = cfg.scalar_rel_tol
    match ty:
        case t if t in (Real, One, Top):
            return values_close(a, b, tol), True
        case Bang(i):
            if not (isinstance(a, VBang) and isinstance(b, VBang)):
                return False, True
            return _compare(i, a.inner, b.inner, cfg, rng, flops)
        case Tensor(l, r):
            if not (isinstance(a, VPair) and isinstance(b, VPair)):
                return False, True
            ok1, e1 = _compare(l, a.left, b.left, cfg, rng, flops)
            if not ok1:
                return False, e1
            ok2, e2 = _compare(r, a.right, b.right, cfg, rng, flops)
            return ok2, e1 and e2
        case With(l, r):
            if not (isinstance(a, VWith) and isinstance(b, VWith)):
                return False, True
            ok1, e1 = _compare(l, a.left, b.left, cfg, rng, flops)
            if not ok1:
                return False, e1
            ok2, e2 = _compare(r, a.right, b.right, cfg, rng, flops)
            return ok2, e1 and e2
        case Lolli(dom, cod) if is_with_seq(dom):
            # exact on the canonical basis for linear maps, plus samples
            for v in basis_values(dom):
                ra = apply_value(a, v, flops)
                rb = apply_value(b, v, flops)
                ok, _ = _compare(cod, ra, rb, cfg, rng, flops)
                if not ok:
                    return False, True
            for _ in range(cfg.sample_count):
                v = random_value_of(dom, rng)
                ok, _ = _compare(cod, apply_value(a, v, flops),
                                 apply_value(b, v, flops), cfg, rng, flops)
                if not ok:
                    return False, True
            return True, True
        case Lolli(dom, cod) if is_ground(dom):
            for _ in range(cfg.sample_count):
                v = random_value_of(dom, rng)
                ok, _ = _compare(cod, apply_value(a, v, flops),
                                 apply_value(b, v, flops), cfg, rng, flops)
                if not ok:
                    return False, False
            return True, False
    raise NotWithSeq(f"cannot compare values at {ty!r}")


def equiv_check(ty: LType, m: Term, n: Term, env: TypingEnv,
                cfg: EquivConfig | None = None) -> Verdict:
    """Test-based approximation of extensional equivalence.  A reported
    counterexample is definitive; 'equivalent' is exact for sequence
    types and basis-tested linear maps, probabilistic otherwise."""
    cfg = cfg or EquivConfig()
    tm = typecheck(env, m)
    tn = typecheck(env, n)
    if tm != ty or tn != ty:
        from linlog.lll.typecheck import TypeMismatch
        raise TypeMismatch(f"{tm!r} / {tn!r} do not match {ty!r}")
    rng = random.Random(cfg.rng_seed)
    rounds = cfg.sample_count if env.entries else 1
    all_exact = True
    for _ in range(rounds):
        values, env_exact = _close_env(env, rng, supply=None)
        flops = Flops()
        va = eval_term(m, dict(values), flops)
        vb = eval_term(n, dict(values), flops)
        ok, exact = _compare(ty, va, vb, cfg, rng, flops)
        all_exact = all_exact and exact and (env_exact or not env.entries)
        if not ok:
            return Verdict(False, True, (values, va, vb))
    if env.entries:
        all_exact = False
    return Verdict(True, all_exact)


# --------------------------------------------------------- finite difference

def lll_eval_primal(p: Term, values: dict[str, Value]) -> tuple[Value, int]:
    flops = Flops()
    v = eval_term(p, dict(values), flops)
    return v, flops.count


def finite_diff_grad(p: Term, theta: list[tuple[str, LType]],
                     point: list[NumTuple], cfg: EquivConfig | None = None
                     ) -> list[float]:
    """Central differences of the scalar primal along every scalar input."""
    cfg = cfg or EquivConfig()
    h = cfg.fd_step
    flat = []
    shapes = []
    for v in point:
        xs = _nt_flatten(v)
        shapes.append(len(xs))
        flat.extend(xs)

    def run(xs):
        values = {}
        i = 0
        for (name, _), n in zip(theta, shapes):
            values[name] = _nt_unflatten_primal(xs[i:i + n], point[len(values)])
            i += n
        v, _ = lll_eval_primal(p, values)
        out = flatten_value(v)
        assert len(out) == 1, "finite differences need a scalar output"
        return out[0]

    grad = []
    for j in range(len(flat)):
        up = list(flat)
        dn = list(flat)
        up[j] += h
        dn[j] -= h
        grad.append((run(up) - run(dn)) / (2 * h))
    return grad


def _nt_flatten(v: NumTuple) -> list[float]:
    from linlog.linear_a.values import flatten
    return flatten(v)


def _nt_unflatten_primal(xs, template: NumTuple) -> Value:
    def go(t, i):
        match t:
            case Scalar(_):
                return VNum(xs[i]), i + 1
            case NPair(l, r):
                a, i = go(l, i)
                b, i = go(r, i)
                return VPair(VBang(a), VBang(b)), i
            case _:
                return VUnit(), i

    v, _ = go(template, 0)
    return v


# ------------------------------------------------------------- grad runner

@dataclass
class GradResult:
    primal: NumTuple
    gradient: list[NumTuple]
    flops: int
    workload_bound: int
    jacobian_t: list[list[NumTuple]] | None = None


def run_grad(p: Term, theta: list[tuple[str, LType]], point: list[NumTuple],
             pipeline: str = "tuf", simplify_output: bool = False,
             cfg: EquivConfig | None = None,
             supply: NameSupply | None = None) -> GradResult:
    """Gradient through the reverse pipeline.  For a scalar output the
    transposed tangent map is applied to the unit cotangent; tuple
    outputs are run once per basis cotangent, yielding the transposed
    Jacobian row by row."""
    from linlog.autodiff import forward, seq_tangent, transpose, unzip
    from linlog.lll.reduce import simplify as simp
    from linlog.lll.workload import workload_term

    supply = supply or NameSupply()
    cfg = cfg or EquivConfig()
    f, enum = forward(theta, p, supply)
    if pipeline == "tuf":
        r = transpose(None, unzip(f, supply), supply)
    elif pipeline == "tf":
        r = transpose(None, f, supply)
    else:
        raise ValueError(f"unknown pipeline {pipeline!r}")
    if simplify_output:
        r = simp(r)

    ein = with_tuple_types(enum)
    out_e = _out_type(p, theta)
    hty = seq_tangent(out_e)
    values = {n: numtuple_to_primal_value(v) for (n, _), v in zip(theta, point)}

    def one_run(cotangent: Term):
        z, g = supply.fresh("z"), supply.fresh("g")
        pat = PTensor(PBang(z, out_e), para_pattern(PVar(g, Lolli(hty, ein))))
        total = App(Abs(pat, TensorPair(BangVal(Var(z)),
                                        App(Var(g), cotangent))), r)
        out, flops = lll_eval_primal(total, values)
        primal = value_to_numtuple(out.left.inner)
        by_name = dict(zip([n for n, _ in enum],
                           _split_tangent(out.right, enum)))
        row = [by_name[n] for n, _ in theta]
        return primal, row, flops, workload_term(total)

    if hty is Real:
        primal, grads, flops, bound = one_run(Numeral(1.0))
        return GradResult(primal, grads, flops, bound)
    rows = []
    flops = bound = 0
    primal = None
    for b in basis(hty):
        primal, row, fl, wb = one_run(b)
        rows.append(row)
        flops += fl
        bound += wb
    return GradResult(primal, rows[0] if rows else [], flops, bound,
                      jacobian_t=rows)


def with_tuple_types(theta) -> LType:
    from linlog.autodiff import _enum_and_type
    return _enum_and_type(theta)


def _out_type(p, theta) -> LType:
    from linlog.autodiff import _ptype
    return _ptype(p, {n: t for n, t in theta})


def _split_tangent(v: Value, enum) -> list[NumTuple]:
    out = []
    cur = v
    for i in range(len(enum) - 1):
        assert isinstance(cur, VWith)
        out.append(value_to_numtuple(cur.left))
        cur = cur.right
    out.append(value_to_numtuple(cur))
    return out
