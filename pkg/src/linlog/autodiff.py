"""Forward, unzipping and transpose on the linear calculus.

Forward maps a primal-sort term and an enumeration of its free
!-variables to a mixed-sort pair of the original computation and the
directional-derivative map.  Unzipping hoists exponential lets to the
front.  Transpose reverses tangent maps; its engine is the partial
renaming: occurrences of a with-pattern variable in different additive
components are renamed apart, transposed independently, and recombined
by a zero-parsimonious sum that emits an addition only where a variable
was actually shared and a zero only where one was erased.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from linlog.fresh import NameSupply
from linlog.lll.reduce import uniquify
from linlog.lll.terms import (
    Abs, App, BangVal, Numeral, Pattern, PBang, PlusDot, PrimFn, PTensor,
    PUnit, PVar, PWith, TensorPair, Term, TimesDot, TopVal, UnitVal, Var,
    WithPair, Zero, all_names, bang_let, free_vars, let_, para, para_pattern,
    pattern_type, pattern_var_types, pattern_vars, prim_app, with_pattern,
    with_tuple,
)
from linlog.lll.prims import partial_of
from linlog.lll.types import (
    Bang, LType, Lolli, One, Real, Tensor, Top, With, with_tuple_type,
)
from linlog.translate import add_app, mk_zero


class SortViolation(Exception):
    pass


class EnumerationMismatch(Exception):
    pass


class CaptureDetected(Exception):
    pass


class CodomainOverlap(Exception):
    pass


def seq_tangent(e: LType) -> LType:
    """t(.) extended to tensor-sequence types."""
    match e:
        case x if x is Real:
            return Real
        case x if x is One:
            return Top
        case Tensor(Bang(l), Bang(r)):
            return With(seq_tangent(l), seq_tangent(r))
    raise SortViolation(f"{e!r} is not a tensor-sequence type")


# ------------------------------------------------------------------ forward

def _enum_and_type(theta: list[tuple[str, LType]]) -> LType:
    return with_tuple_type([seq_tangent(e) for _, e in theta])


class _Tree:
    """One destructuring of the tangent tuple for an enumeration."""

    def __init__(self, theta, supply):
        self.theta = list(theta)
        self.supply = supply
        self.y = supply.fresh("u")
        self.leaf = {n: supply.fresh("u") for n, _ in theta}

    def lam(self, body: Term) -> Term:
        if not self.theta:
            return Abs(PVar(self.y, Top), body)
        if len(self.theta) == 1:
            n, e = self.theta[0]
            return Abs(PVar(self.leaf[n], seq_tangent(e)), body)
        tree = with_pattern([PVar(self.leaf[n], seq_tangent(e))
                             for n, e in self.theta])
        return Abs(PVar(self.y, _enum_and_type(self.theta)),
                   let_(tree, Var(self.y), body))

    def var(self, name: str) -> Term:
        return Var(self.leaf[name])

    def tuple_of(self, names) -> Term | None:
        names = list(names)
        if not names:
            return None
        return with_tuple([self.var(n) for n in names])

    def unit_arg(self) -> Term:
        # a T-typed argument: the whole tuple when the enumeration is
        # empty, a closed <> otherwise
        return Var(self.y) if not self.theta else TopVal()


def _cons_arg(head: Term | None, tail: Term | None, ctx: _Tree) -> Term:
    if head is None and tail is None:
        return ctx.unit_arg()
    if head is None:
        return tail
    if tail is None:
        return head
    return WithPair(head, tail)


def _ptype(p: Term, tys: dict[str, LType]) -> LType:
    """The inner type E of a primal-sort term of type !E."""
    match p:
        case BangVal(Var(x)):
            return tys[x]
        case BangVal(Numeral(_)) | BangVal(Zero()):
            return Real
        case BangVal(UnitVal()):
            return One
        case BangVal(TensorPair(a, b)):
            return Tensor(Bang(_ptype(a, tys)), Bang(_ptype(b, tys)))
        case App(PrimFn(_), _):
            return Real
        case App(Abs(PBang(x, ty), body), _):
            return _ptype(body, tys | {x: ty})
        case App(Abs(pat, body), Var(_)):
            inner = {n: t.inner if isinstance(t, Bang) else t
                     for n, t in pattern_var_types(pat).items()}
            return _ptype(body, tys | inner)
    raise SortViolation(f"not a primal-sort term: {p!r}")


def _bang_section_pat(x: str, ety: LType, f: str, fty: LType) -> Pattern:
    return PTensor(PBang(x, ety), para_pattern(PVar(f, fty)))


def forward(theta: list[tuple[str, LType]], p: Term,
            supply: NameSupply | None = None) -> tuple[Term, list]:
    """F over primal-sort terms; theta enumerates FV(p) with the inner
    types of their !-bindings.  Returns the transformed term and the
    enumeration actually used: a primitive application at the root fixes
    argument order, otherwise the given order is kept."""
    supply = supply or NameSupply()
    names = [n for n, _ in theta]
    if set(names) != set(free_vars(p)) or len(names) != len(set(names)):
        raise EnumerationMismatch(
            f"enumeration {names} vs free variables {sorted(free_vars(p))}")
    return _fwd(theta, p, {n: e for n, e in theta}, supply)


def _restrict(theta, names) -> list:
    keep = set(names)
    return [(n, e) for n, e in theta if n in keep]


def _arg_tuple(ctx: _Tree, enum, components=None) -> Term:
    """Tangent tuple for a callee enumeration; `components` overrides
    the tree variable for selected names."""
    if not enum:
        return ctx.unit_arg()
    comps = components or {}
    return with_tuple([comps.get(n, None) or ctx.var(n) for n, _ in enum])


def _fwd(theta, p: Term, tys, supply) -> tuple[Term, list]:
    match p:
        case BangVal(Var(x)):
            u = supply.fresh("u")
            return TensorPair(BangVal(Var(x)),
                              para(Abs(PVar(u, seq_tangent(tys[x])), Var(u)))), theta
        case BangVal(Numeral(_)) | BangVal(Zero()):
            u = supply.fresh("u")
            return TensorPair(p, para(Abs(PVar(u, Top), Zero()))), theta
        case BangVal(UnitVal()):
            u = supply.fresh("u")
            return TensorPair(p, para(Abs(PVar(u, Top), TopVal()))), theta

        case BangVal(TensorPair(pa, pb)):
            fa_t, tha = _fwd(_restrict(theta, free_vars(pa)), pa, tys, supply)
            fb_t, thb = _fwd(_restrict(theta, free_vars(pb)), pb, tys, supply)
            a, f = supply.fresh("x"), supply.fresh("f")
            b, g = supply.fresh("x"), supply.fresh("g")
            ea, eb = _ptype(pa, tys), _ptype(pb, tys)
            ctx = _Tree(theta, supply)
            fa = App(Var(f), _arg_tuple(ctx, tha))
            gb = App(Var(g), _arg_tuple(ctx, thb))
            body = ctx.lam(WithPair(fa, gb))
            out = TensorPair(BangVal(TensorPair(BangVal(Var(a)), BangVal(Var(b)))),
                             para(body))
            out = let_(_bang_section_pat(b, eb, g, _fn_ty(thb, eb)), fb_t, out)
            return let_(_bang_section_pat(a, ea, f, _fn_ty(tha, ea)), fa_t, out), theta

        case App(Abs(PBang(x, xty), pb), q):
            fq_t, thq = _fwd(_restrict(theta, free_vars(q)), q, tys, supply)
            thp = _restrict(theta, free_vars(pb) - {x})
            live = x in free_vars(pb)
            hint = ([(x, xty)] if live else []) + thp
            fp_t, thg = _fwd(hint, pb, tys | {x: xty}, supply)
            f, y, g = supply.fresh("f"), supply.fresh("y"), supply.fresh("g")
            ey = _ptype(pb, tys | {x: xty})
            ctx = _Tree(theta, supply)
            comps = {}
            if live:
                comps[x] = App(Var(f), _arg_tuple(ctx, thq))
            body = ctx.lam(App(Var(g), _arg_tuple(ctx, thg, comps)))
            out = TensorPair(BangVal(Var(y)), para(body))
            out = let_(_bang_section_pat(y, ey, g, _fn_ty(thg, ey)), fp_t, out)
            return let_(_bang_section_pat(x, xty, f, _fn_ty(thq, xty)),
                        fq_t, out), theta

        case App(PrimFn(fn), _) as ap:
            args = _prim_arg_vars(ap.arg, fn.arity)
            enum = []
            for n in args:  # first-occurrence argument order
                if n not in [m for m, _ in enum]:
                    enum.append((n, tys[n]))
            ys = [supply.fresh("w") for _ in range(fn.arity)]
            uvar = {n: supply.fresh("u") for n, _ in enum}
            prods = [App(App(TimesDot(), Var(y)), Var(uvar[x]))
                     for y, x in zip(ys, args)]
            acc = prods[-1]
            for t in reversed(prods[:-1]):
                acc = App(PlusDot(), WithPair(t, acc))
            # the tangent tuple is bound by a with-pattern directly
            pat = with_pattern([PVar(uvar[n], seq_tangent(e)) for n, e in enum])
            out = TensorPair(prim_app(fn, [BangVal(Var(x)) for x in args]),
                             para(Abs(pat, acc)))
            for i, y in reversed(list(enumerate(ys))):
                out = bang_let(y, Real,
                               prim_app(partial_of(fn, i),
                                        [BangVal(Var(x)) for x in args]), out)
            return out, enum

        case App(Abs(pat, pb), Var(z)) if isinstance(pat, (PTensor, PUnit)):
            leaves = _tensor_pattern_leaves(pat)
            inner_tys = tys | {n: e for n, e in leaves}
            live = [(n, e) for n, e in leaves if n in free_vars(pb)]
            thp = _restrict(theta, free_vars(pb) - {n for n, _ in leaves})
            fp_t, thg = _fwd(live + thp, pb, inner_tys, supply)
            y, g = supply.fresh("y"), supply.fresh("g")
            ey = _ptype(pb, inner_tys)
            ctx = _Tree(theta, supply)
            # expand z's tangent component into the shape of the pattern
            tanvars = {n: supply.fresh("v") for n, _ in leaves}

            def expand(q):
                match q:
                    case PBang(n, e):
                        return PVar(tanvars[n], seq_tangent(e))
                    case PUnit():
                        return PVar(supply.fresh("t"), Top)
                    case PTensor(l, r):
                        return PWith(expand(l), expand(r))
                raise SortViolation(f"bad tensor pattern {q!r}")

            zslot = expand(pat)
            tree_pats = [zslot if n == z else PVar(ctx.leaf[n], seq_tangent(e))
                         for n, e in ctx.theta]
            comps = {n: Var(tanvars[n]) for n, _ in live}
            comps[z] = _rebuild_with(zslot)
            garg = _arg_tuple(ctx, thg, comps)
            ypat = PVar(ctx.y, _enum_and_type(theta))
            body = Abs(ypat, let_(with_pattern(tree_pats), Var(ctx.y),
                                  App(Var(g), garg)))
            out = TensorPair(BangVal(Var(y)), para(body))
            out = let_(_bang_section_pat(y, ey, g, _fn_ty(thg, ey)), fp_t, out)
            return let_(pat, Var(z), out), theta

    raise SortViolation(f"not a primal-sort term: {p!r}")


def _rebuild_with(pat: Pattern) -> Term:
    match pat:
        case PVar(n, _):
            return Var(n)
        case PWith(l, r):
            return WithPair(_rebuild_with(l), _rebuild_with(r))
    raise AssertionError(pat)


def _fn_ty(theta, out_e: LType) -> LType:
    return Lolli(_enum_and_type(theta), seq_tangent(out_e))


def _tensor_pattern_leaves(pat: Pattern) -> list[tuple[str, LType]]:
    match pat:
        case PBang(n, e):
            return [(n, e)]
        case PUnit():
            return []
        case PTensor(l, r):
            return _tensor_pattern_leaves(l) + _tensor_pattern_leaves(r)
    raise SortViolation(f"bad tensor pattern {pat!r}")


def _prim_arg_vars(arg: Term, arity: int) -> list[str]:
    out = []
    cur = arg
    for _ in range(arity - 1):
        if not (isinstance(cur, TensorPair) and isinstance(cur.left, BangVal)
                and isinstance(cur.left.inner, Var)):
            raise SortViolation(f"primitive argument {arg!r}")
        out.append(cur.left.inner.name)
        cur = cur.right
    if not (isinstance(cur, BangVal) and isinstance(cur.inner, Var)):
        raise SortViolation(f"primitive argument {arg!r}")
    out.append(cur.inner.name)
    return out


# ---------------------------------------------------------------- unzipping

@dataclass(frozen=True)
class LetBang:
    name: str
    ty: LType
    term: Term


@dataclass(frozen=True)
class LetTensorPat:
    pat: Pattern
    var: str


@dataclass(frozen=True)
class ExpContext:
    frames: tuple = ()

    def plug(self, core: Term) -> Term:
        for fr in reversed(self.frames):
            match fr:
                case LetBang(x, ty, p):
                    core = bang_let(x, ty, p, core)
                case LetTensorPat(pat, z):
                    core = let_(pat, Var(z), core)
        return core


def _match_bang_section_let(m: Term):
    match m:
        case App(Abs(PTensor(PBang(x, ty), PWith(PUnit(), PVar(f, fty))), body), rhs):
            return x, ty, f, fty, body, rhs
    return None


def _match_section_let(m: Term):
    match m:
        case App(Abs(PWith(PUnit(), PVar(f, fty)), body), WithPair(UnitVal(), rhs)):
            return f, fty, body, rhs
    return None


def _match_bang_let(m: Term):
    match m:
        case App(Abs(PBang(x, ty), body), rhs):
            return x, ty, body, rhs
    return None


def _match_tensor_let(m: Term):
    match m:
        case App(Abs(pat, body), Var(z)) if isinstance(pat, (PTensor, PUnit)):
            return pat, z, body
    return None


def unzip_decompose(s: Term) -> tuple[ExpContext, Term, Term]:
    match s:
        case TensorPair(p, WithPair(UnitVal(), f)):
            return ExpContext(), p, f
    m = _match_bang_section_let(s)
    if m is not None:
        x, ty, f, fty, body, rhs = m
        e1, p1, f1 = unzip_decompose(rhs)
        e2, p2, f2 = unzip_decompose(body)
        ctx = ExpContext(e1.frames + (LetBang(x, ty, p1),) + e2.frames)
        fpart = let_(para_pattern(PVar(f, fty)), para(f1), f2)
        return ctx, p2, fpart
    m = _match_section_let(s)
    if m is not None:
        f, fty, body, rhs = m
        e1, p1, f1 = unzip_decompose(body)
        return e1, p1, let_(para_pattern(PVar(f, fty)), para(rhs), f1)
    m = _match_bang_let(s)
    if m is not None:
        x, ty, body, rhs = m
        e1, p1, f1 = unzip_decompose(body)
        return ExpContext((LetBang(x, ty, rhs),) + e1.frames), p1, f1
    m = _match_tensor_let(s)
    if m is not None:
        pat, z, body = m
        e1, p1, f1 = unzip_decompose(body)
        return ExpContext((LetTensorPat(pat, z),) + e1.frames), p1, f1
    raise SortViolation(f"not a mixed-sort term: {s!r}")


def unzip(s: Term, supply: NameSupply | None = None) -> Term:
    supply = supply or NameSupply()
    s = uniquify(s, supply)
    ctx, p, f = unzip_decompose(s)
    return ctx.plug(TensorPair(p, para(f)))


# ---------------------------------------------------------------- renamings

@dataclass(frozen=True)
class Renaming:
    pairs: tuple[tuple[str, str], ...] = ()

    @staticmethod
    def identity(names) -> "Renaming":
        return Renaming(tuple((n, n) for n in names))

    @staticmethod
    def fresh_for(names, supply: NameSupply) -> "Renaming":
        return Renaming(tuple((n, supply.fresh(n.lstrip("%").split("#")[0] or "u"))
                              for n in names))

    def dom(self) -> set[str]:
        return {a for a, _ in self.pairs}

    def cod(self) -> set[str]:
        return {b for _, b in self.pairs}

    def get(self, name: str) -> str:
        for a, b in self.pairs:
            if a == name:
                return b
        raise KeyError(name)

    def mapping(self) -> dict[str, str]:
        return dict(self.pairs)


EMPTY_RENAMING = Renaming()


def rename_apply(alpha: Renaming, m: Term) -> Term:
    """alpha[M]: replace free occurrences of the domain."""
    ren = {a: b for a, b in alpha.pairs if a != b}
    if not ren:
        return m
    clash = set(ren.values()) & all_names(m)
    if clash:
        raise CaptureDetected(f"codomain names {sorted(clash)} occur in the term")
    from linlog.lll.reduce import _rename_free
    return _rename_free(m, ren)


def rename_pattern(alpha: Renaming, p: Pattern) -> Pattern:
    """alpha[p]: rename matching leaves, keeping the shape."""
    ren = alpha.mapping()
    from linlog.lll.reduce import _rename_pattern
    return _rename_pattern(p, ren)


def rename_project(alpha: Renaming, p: Pattern,
                   supply: NameSupply | None = None) -> Pattern:
    """alpha<p>: the sub-pattern of renamed components; sub-patterns
    disjoint from the domain vanish, and a fresh T variable stands in
    when nothing at all is renamed."""
    dom = alpha.dom()

    def go(q):
        match q:
            case PVar(n, ty):
                return PVar(alpha.get(n), ty) if n in dom else None
            case PWith(l, r):
                gl, gr = go(l), go(r)
                if gl is not None and gr is not None:
                    return PWith(gl, gr)
                return gl if gl is not None else gr
        raise SortViolation(f"not a with-sequence pattern: {q!r}")

    out = go(p)
    if out is None:
        supply = supply or NameSupply()
        return PVar(supply.fresh("t"), Top)
    return out


def nu(p: Pattern, a1: Renaming, a2: Renaming) -> Term:
    """Zero-parsimonious sum of two renamings of a pattern."""
    if a1.cod() & a2.cod():
        raise CodomainOverlap(str(a1.cod() & a2.cod()))
    d1, d2 = a1.dom(), a2.dom()

    def go(q):
        if not (set(pattern_vars(q)) & (d1 | d2)):
            return mk_zero(pattern_type(q))
        match q:
            case PVar(n, ty):
                if n in d1 and n in d2:
                    return add_app(ty, Var(a1.get(n)), Var(a2.get(n)))
                return Var(a1.get(n)) if n in d1 else Var(a2.get(n))
            case PWith(l, r):
                return WithPair(go(l), go(r))
        raise SortViolation(f"not a with-sequence pattern: {q!r}")

    return go(p)


# ---------------------------------------------------------------- transpose

@dataclass
class SectionEnv:
    """Maps each section-bound function to its cotangent sibling and
    original type."""
    entries: dict[str, tuple[str, LType]] = field(default_factory=dict)

    def extend(self, f, fc, ty):
        out = dict(self.entries)
        out[f] = (fc, ty)
        return SectionEnv(out)


def _f_type(f: Term, phi: SectionEnv, ptys: dict[str, LType]) -> LType:
    match f:
        case Var(name):
            if name in phi.entries:
                return phi.entries[name][1]
            return ptys[name]
        case PlusDot():
            return Lolli(With(Real, Real), Real)
        case App(TimesDot(), _):
            return Lolli(Real, Real)
        case Abs(pat, body):
            return Lolli(pattern_type(pat),
                         _t_type(body, phi, ptys | pattern_var_types(pat)))
    m = _match_section_let(f)
    if m is not None:
        g, gty, body, _rhs = m
        return _f_type(body, phi, ptys | {g: gty})
    raise SortViolation(f"not a tangent-function term: {f!r}")


def _t_type(u: Term, phi: SectionEnv, ptys) -> LType:
    match u:
        case Var(n):
            return ptys[n]
        case Zero():
            return Real
        case TopVal():
            return Top
        case WithPair(l, r):
            return With(_t_type(l, phi, ptys), _t_type(r, phi, ptys))
        case App(f, _):
            ty = _f_type(f, phi, ptys)
            return ty.cod
    raise SortViolation(f"not a tangent-sort term: {u!r}")


def transpose_t(phi: SectionEnv, p: Pattern, u: Term, supply: NameSupply,
                ptys: dict[str, LType]):
    """Returns (cotangent pattern q, body, used p-variables)."""
    pvars = set(pattern_vars(p))
    ptypes = pattern_var_types(p)

    match u:
        case Var(name) if name in pvars:
            q = supply.fresh("z")
            return PVar(q, ptypes[name]), Var(q), {name}

        case Zero():
            return PVar(supply.fresh("z"), Real), TopVal(), set()
        case TopVal():
            return PVar(supply.fresh("z"), Top), TopVal(), set()

        case WithPair(u1, u2):
            a1 = Renaming.fresh_for([n for n in pattern_vars(p)
                                     if n in free_vars(u1)], supply)
            a2 = Renaming.fresh_for([n for n in pattern_vars(p)
                                     if n in free_vars(u2)], supply)
            p1, t1 = rename_pattern(a1, p), rename_apply(a1, u1)
            p2, t2 = rename_pattern(a2, p), rename_apply(a2, u2)
            q1, b1, used1 = transpose_t(phi, p1, t1, supply, ptys)
            q2, b2, used2 = transpose_t(phi, p2, t2, supply, ptys)
            assert used1 == a1.cod() and used2 == a2.cod()
            binder = PWith(rename_project(a1, p, supply),
                           rename_project(a2, p, supply))
            used = a1.dom() | a2.dom()
            # the zeros for components untouched by both branches are
            # emitted once, by the enclosing lambda wrapper: sum over the
            # used projection only
            p_used = rename_project(Renaming.identity(
                [n for n in pattern_vars(p) if n in used]), p, supply)
            body = let_(binder, WithPair(b1, b2), nu(p_used, a1, a2))
            return PWith(q1, q2), body, used

        case App(f, u1):
            fc = transpose_f(phi, f, supply, ptys)
            hty = _f_type(f, phi, ptys | ptypes).cod
            q1, b1, used1 = transpose_t(phi, p, u1, supply, ptys)
            q = supply.fresh("z")
            body = App(Abs(q1, b1), App(fc, Var(q)))
            return PVar(q, hty), body, used1

    raise SortViolation(f"not a tangent-sort term: {u!r}")


def transpose_f(phi: SectionEnv, f: Term, supply: NameSupply,
                ptys: dict[str, LType]) -> Term:
    match f:
        case Var(name):
            if name not in phi.entries:
                raise SortViolation(f"function variable {name} not section-bound")
            return Var(phi.entries[name][0])
        case PlusDot():
            u = supply.fresh("u")
            return Abs(PVar(u, Real), WithPair(Var(u), Var(u)))
        case App(TimesDot(), _):
            return f
        case Abs(pat, body):
            q, b, used = transpose_t(phi, pat, body, supply, ptys)
            alpha = Renaming.identity([n for n in pattern_vars(pat) if n in used])
            return Abs(q, let_(rename_project(alpha, pat, supply), b,
                               nu(pat, alpha, EMPTY_RENAMING)))
    m = _match_section_let(f)
    if m is not None:
        g, gty, body, rhs = m
        if g not in free_vars(body):
            return transpose_f(phi, body, supply, ptys)
        gc = supply.fresh(g.lstrip("%").split("#")[0] or "f")
        inner = transpose_f(phi.extend(g, gc, gty), body, supply, ptys)
        gcty = Lolli(gty.cod, gty.dom)
        return let_(para_pattern(PVar(gc, gcty)), para(transpose_f(phi, rhs, supply, ptys)),
                    inner)
    raise SortViolation(f"not a tangent-function term: {f!r}")


def transpose(phi: SectionEnv | None, r: Term,
              supply: NameSupply | None = None) -> Term:
    """T over mixed-sort terms; works with or without prior unzipping."""
    supply = supply or NameSupply()
    phi = phi or SectionEnv()
    r = uniquify(r, supply)
    return _transpose_a(phi, r, supply, {})


def _transpose_a(phi: SectionEnv, r: Term, supply, ptys) -> Term:
    match r:
        case TensorPair(p, WithPair(UnitVal(), f)):
            return TensorPair(p, para(transpose_f(phi, f, supply, ptys)))
    m = _match_bang_section_let(r)
    if m is not None:
        x, ty, f, fty, body, rhs = m
        if f not in free_vars(body):
            ctx, p1, _f1 = unzip_decompose(rhs)
            return bang_let(x, ty, ctx.plug(p1),
                            _transpose_a(phi, body, supply, ptys))
        fc = supply.fresh(f.lstrip("%").split("#")[0] or "f")
        fcty = Lolli(fty.cod, fty.dom)
        inner = _transpose_a(phi.extend(f, fc, fty), body, supply, ptys)
        return let_(_bang_section_pat(x, ty, fc, fcty),
                    _transpose_a(phi, rhs, supply, ptys), inner)
    m = _match_section_let(r)
    if m is not None:
        f, fty, body, rhs = m
        if f not in free_vars(body):
            return _transpose_a(phi, body, supply, ptys)
        fc = supply.fresh(f.lstrip("%").split("#")[0] or "f")
        inner = _transpose_a(phi.extend(f, fc, fty), body, supply, ptys)
        return let_(para_pattern(PVar(fc, Lolli(fty.cod, fty.dom))),
                    para(transpose_f(phi, rhs, supply, ptys)), inner)
    m = _match_bang_let(r)
    if m is not None:
        x, ty, body, rhs = m
        return bang_let(x, ty, rhs, _transpose_a(phi, body, supply, ptys))
    m = _match_tensor_let(r)
    if m is not None:
        pat, z, body = m
        return let_(pat, Var(z), _transpose_a(phi, body, supply, ptys))
    raise SortViolation(f"not a mixed-sort term: {r!r}")
