"""Terms and binder patterns of the linear calculus.

Church style: every bound variable's type is fixed by its pattern
occurrence.  ``let p = N in M`` is notation for ``App(Abs(p, M), N)`` and
``par(M)`` (the affine box, displayed as a section sign in the sources
this grammar models) is notation for ``WithPair(UnitVal, M)``.
"""

from __future__ import annotations

from dataclasses import dataclass

from linlog.lll.prims import PrimId
from linlog.lll.types import (
    Bang, LType, One, Real, Tensor, With, is_with_seq, type_str,
)

# ---------------------------------------------------------------- patterns


class Pattern:
    __slots__ = ()

    def __repr__(self):
        return pattern_str(self)


@dataclass(frozen=True, repr=False)
class PVar(Pattern):
    name: str
    ty: LType


@dataclass(frozen=True, repr=False)
class PBang(Pattern):
    name: str
    ty: LType  # the inner type A; the pattern itself has type !A


@dataclass(frozen=True, repr=False)
class PUnit(Pattern):
    pass


@dataclass(frozen=True, repr=False)
class PTensor(Pattern):
    left: Pattern
    right: Pattern


@dataclass(frozen=True, repr=False)
class PWith(Pattern):
    left: Pattern
    right: Pattern


def pattern_type(p: Pattern) -> LType:
    match p:
        case PVar(_, ty):
            return ty
        case PBang(_, ty):
            return Bang(ty)
        case PUnit():
            return One
        case PTensor(l, r):
            return Tensor(pattern_type(l), pattern_type(r))
        case PWith(l, r):
            return With(pattern_type(l), pattern_type(r))
    raise AssertionError(p)


def pattern_vars(p: Pattern) -> list[str]:
    match p:
        case PVar(name, _) | PBang(name, _):
            return [name]
        case PUnit():
            return []
        case PTensor(l, r) | PWith(l, r):
            return pattern_vars(l) + pattern_vars(r)
    raise AssertionError(p)


def pattern_var_types(p: Pattern) -> dict[str, LType]:
    """Name -> type of the variable as a resource (!A for bang leaves)."""
    out: dict[str, LType] = {}

    def go(q):
        match q:
            case PVar(name, ty):
                out[name] = ty
            case PBang(name, ty):
                out[name] = Bang(ty)
            case PTensor(l, r) | PWith(l, r):
                go(l)
                go(r)
            case PUnit():
                pass
    go(p)
    return out


def is_exponential(p: Pattern) -> bool:
    return isinstance(p, PBang)


def is_with_pattern(p: Pattern) -> bool:
    match p:
        case PVar(_, ty):
            return is_with_seq(ty)
        case PWith(l, r):
            return is_with_pattern(l) and is_with_pattern(r)
        case _:
            return False


def is_tensor_pattern(p: Pattern) -> bool:
    match p:
        case PVar(_, _) | PBang(_, _) | PUnit():
            return True
        case PTensor(l, r):
            return is_tensor_pattern(l) and is_tensor_pattern(r)
        case _:
            return False


def with_pattern(leaves: list[Pattern]) -> Pattern:
    """Right-nested n-ary with pattern; empty never occurs at call sites."""
    assert leaves
    out = leaves[-1]
    for p in reversed(leaves[:-1]):
        out = PWith(p, out)
    return out


def para_pattern(p: Pattern) -> Pattern:
    return PWith(PUnit(), p)


# ------------------------------------------------------------------- terms


class Term:
    __slots__ = ()

    def __repr__(self):
        return term_str(self)


@dataclass(frozen=True, repr=False)
class Var(Term):
    name: str


@dataclass(frozen=True, repr=False)
class Numeral(Term):
    value: float


@dataclass(frozen=True, repr=False)
class PrimFn(Term):
    fn: PrimId


@dataclass(frozen=True, repr=False)
class PlusDot(Term):
    pass


@dataclass(frozen=True, repr=False)
class TimesDot(Term):
    pass


@dataclass(frozen=True, repr=False)
class Zero(Term):
    # behaves as the numeral 0.0 but is typeable under any context
    pass


@dataclass(frozen=True, repr=False)
class Abs(Term):
    pat: Pattern
    body: Term


@dataclass(frozen=True, repr=False)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True, repr=False)
class UnitVal(Term):
    pass


@dataclass(frozen=True, repr=False)
class TensorPair(Term):
    left: Term
    right: Term


@dataclass(frozen=True, repr=False)
class BangVal(Term):
    inner: Term


@dataclass(frozen=True, repr=False)
class TopVal(Term):
    pass


@dataclass(frozen=True, repr=False)
class WithPair(Term):
    left: Term
    right: Term


# ------------------------------------------------------------ conveniences

def para(m: Term) -> Term:
    return WithPair(UnitVal(), m)


def let_(p: Pattern, n: Term, m: Term) -> Term:
    return App(Abs(p, m), n)


def bang_let(name: str, ty: LType, n: Term, m: Term) -> Term:
    return let_(PBang(name, ty), n, m)


def with_tuple(components: list[Term]) -> Term:
    if not components:
        return TopVal()
    out = components[-1]
    for c in reversed(components[:-1]):
        out = WithPair(c, out)
    return out


def prim_app(p: PrimId, args: list[Term]) -> Term:
    """f(M1, ..., Mn): the argument is a right-nested tensor of the Mi."""
    assert len(args) == p.arity
    arg = args[-1]
    for a in reversed(args[:-1]):
        arg = TensorPair(a, arg)
    return App(PrimFn(p), arg)


def prim_arg_type(arity: int) -> LType:
    out: LType = Bang(Real)
    for _ in range(arity - 1):
        out = Tensor(Bang(Real), out)
    return out


def free_vars(m: Term) -> frozenset[str]:
    match m:
        case Var(name):
            return frozenset((name,))
        case Abs(p, body):
            return free_vars(body) - frozenset(pattern_vars(p))
        case App(f, a) | TensorPair(f, a) | WithPair(f, a):
            return free_vars(f) | free_vars(a)
        case BangVal(i):
            return free_vars(i)
        case _:
            return frozenset()


def all_names(m: Term) -> set[str]:
    """Every variable name occurring anywhere (free, bound, binders)."""
    out: set[str] = set()

    def go(t):
        match t:
            case Var(name):
                out.add(name)
            case Abs(p, body):
                out.update(pattern_vars(p))
                go(body)
            case App(f, a) | TensorPair(f, a) | WithPair(f, a):
                go(f)
                go(a)
            case BangVal(i):
                go(i)
    go(m)
    return out


def term_size(m: Term) -> int:
    match m:
        case Abs(_, body) | BangVal(body):
            return 1 + term_size(body)
        case App(f, a) | TensorPair(f, a) | WithPair(f, a):
            return 1 + term_size(f) + term_size(a)
        case _:
            return 1


def alpha_eq(m: Term, n: Term, tol: float = 1e-9) -> bool:
    """Structural equality up to bound-variable names and a relative
    tolerance on numerals."""

    def num(t):
        match t:
            case Numeral(v):
                return v
            case Zero():
                return 0.0
        return None

    def close(a, b):
        return abs(a - b) <= tol * max(1.0, abs(a), abs(b))

    def pat(p, q, env):
        # returns extended mapping or None on shape/type mismatch
        match p, q:
            case (PVar(a, ta), PVar(b, tb)) if ta == tb:
                return env | {a: b}
            case (PBang(a, ta), PBang(b, tb)) if ta == tb:
                return env | {a: b}
            case (PUnit(), PUnit()):
                return env
            case (PTensor(l1, r1), PTensor(l2, r2)) | (PWith(l1, r1), PWith(l2, r2)):
                env = pat(l1, l2, env)
                return None if env is None else pat(r1, r2, env)
        return None

    def go(a, b, env):
        na, nb = num(a), num(b)
        if na is not None or nb is not None:
            return na is not None and nb is not None and close(na, nb)
        match a, b:
            case (Var(x), Var(y)):
                return env.get(x, x) == y
            case (PrimFn(f), PrimFn(g)):
                return f == g
            case (PlusDot(), PlusDot()) | (TimesDot(), TimesDot()):
                return True
            case (UnitVal(), UnitVal()) | (TopVal(), TopVal()):
                return True
            case (Abs(p, m1), Abs(q, m2)):
                env2 = pat(p, q, env)
                return env2 is not None and go(m1, m2, env2)
            case (App(f1, a1), App(f2, a2)):
                return go(f1, f2, env) and go(a1, a2, env)
            case (TensorPair(f1, a1), TensorPair(f2, a2)):
                return go(f1, f2, env) and go(a1, a2, env)
            case (WithPair(f1, a1), WithPair(f2, a2)):
                return go(f1, f2, env) and go(a1, a2, env)
            case (BangVal(i1), BangVal(i2)):
                return go(i1, i2, env)
        return False

    return go(m, n, {})


# ------------------------------------------------------------ display

def pattern_str(p: Pattern) -> str:
    match p:
        case PVar(name, ty):
            return f"{name}:{type_str(ty)}"
        case PBang(name, _):
            return f"!{name}"
        case PUnit():
            return "()"
        case PTensor(l, r):
            return f"({pattern_str(l)}, {pattern_str(r)})"
        case PWith(l, r) if isinstance(l, PUnit):
            return f"par({pattern_str(r)})"
        case PWith(l, r):
            return f"<{pattern_str(l)}, {pattern_str(r)}>"
    raise AssertionError(p)


def term_str(m: Term) -> str:
    match m:
        case Var(name):
            return name
        case Numeral(v):
            return f"{v:g}"
        case PrimFn(f):
            return f.name
        case PlusDot():
            return "+."
        case TimesDot():
            return "*."
        case Zero():
            return "0."
        case App(Abs(p, body), n):
            return f"let {pattern_str(p)} = {term_str(n)} in {term_str(body)}"
        case Abs(p, body):
            return f"(\\{pattern_str(p)}. {term_str(body)})"
        case App(f, a):
            return f"({term_str(f)} {term_str(a)})"
        case UnitVal():
            return "()"
        case TensorPair(l, r):
            return f"({term_str(l)}, {term_str(r)})"
        case BangVal(i):
            return f"!{term_str(i)}"
        case TopVal():
            return "<>"
        case WithPair(l, r) if isinstance(l, UnitVal):
            return f"par({term_str(r)})"
        case WithPair(l, r):
            return f"<{term_str(l)}, {term_str(r)}>"
    raise AssertionError(m)
