"""Environment-based big-step evaluator for closed terms.

Evaluation order is call-by-value, matching the safe-reduction strategy
on the terms this package produces, and counts the same numeric steps.
Used by the verification layer where source-level rewriting would be too
slow; the rewriting engine remains the reference implementation.
"""

from __future__ import annotations

from dataclasses import dataclass

from linlog.lll.prims import PrimId
from linlog.lll.terms import (
    Abs, App, BangVal, Numeral, Pattern, PBang, PlusDot, PrimFn, PTensor,
    PUnit, PVar, PWith, TensorPair, Term, TimesDot, TopVal, UnitVal, Var,
    WithPair, Zero,
)


class MachineError(Exception):
    pass


class Value:
    __slots__ = ()


@dataclass(frozen=True)
class VNum(Value):
    value: float


@dataclass(frozen=True)
class VUnit(Value):
    pass


@dataclass(frozen=True)
class VTop(Value):
    pass


@dataclass(frozen=True)
class VPair(Value):
    left: Value
    right: Value


@dataclass(frozen=True)
class VWith(Value):
    left: Value
    right: Value


@dataclass(frozen=True)
class VBang(Value):
    inner: Value


@dataclass(frozen=True)
class VClosure(Value):
    pat: Pattern
    body: Term
    env: dict

    def __hash__(self):
        return id(self)

    def __eq__(self, other):
        return self is other


@dataclass(frozen=True)
class VPrim(Value):
    fn: PrimId


@dataclass(frozen=True)
class VPlus(Value):
    pass


@dataclass(frozen=True)
class VTimes(Value):
    partial: float | None = None


class Flops:
    def __init__(self):
        self.count = 0


def _bind(pat: Pattern, v: Value, env: dict):
    match pat:
        case PVar(n, _):
            env[n] = v
        case PBang(n, _):
            if not isinstance(v, VBang):
                raise MachineError(f"pattern !{n} against {v!r}")
            env[n] = v.inner
        case PUnit():
            if not isinstance(v, VUnit):
                raise MachineError(f"unit pattern against {v!r}")
        case PTensor(l, r):
            if not isinstance(v, VPair):
                raise MachineError(f"tensor pattern against {v!r}")
            _bind(l, v.left, env)
            _bind(r, v.right, env)
        case PWith(l, r):
            if not isinstance(v, VWith):
                raise MachineError(f"with pattern against {v!r}")
            _bind(l, v.left, env)
            _bind(r, v.right, env)


def _num(v: Value) -> float:
    if isinstance(v, VNum):
        return v.value
    raise MachineError(f"expected a number, got {v!r}")


def _prim_args(v: Value, arity: int) -> list[float]:
    out = []
    cur = v
    for _ in range(arity - 1):
        if not isinstance(cur, VPair):
            raise MachineError(f"primitive argument {v!r}")
        if not isinstance(cur.left, VBang):
            raise MachineError(f"primitive argument {v!r}")
        out.append(_num(cur.left.inner))
        cur = cur.right
    if not isinstance(cur, VBang):
        raise MachineError(f"primitive argument {v!r}")
    out.append(_num(cur.inner))
    return out


def apply_value(f: Value, a: Value, flops: Flops) -> Value:
    match f:
        case VClosure(pat, body, env):
            env2 = dict(env)
            _bind(pat, a, env2)
            return eval_term(body, env2, flops)
        case VPrim(p):
            args = _prim_args(a, p.arity)
            flops.count += 1
            return VBang(VNum(p.eval(*args)))
        case VPlus():
            if not isinstance(a, VWith):
                raise MachineError(f"+. applied to {a!r}")
            flops.count += 1
            return VNum(_num(a.left) + _num(a.right))
        case VTimes(partial=None):
            return VTimes(partial=_num(a))
        case VTimes(partial=r):
            flops.count += 1
            return VNum(r * _num(a))
    raise MachineError(f"applying non-function {f!r}")


def eval_term(m: Term, env: dict, flops: Flops) -> Value:
    match m:
        case Var(n):
            try:
                return env[n]
            except KeyError:
                raise MachineError(f"unbound {n}") from None
        case Numeral(v):
            return VNum(v)
        case Zero():
            return VNum(0.0)
        case PrimFn(p):
            return VPrim(p)
        case PlusDot():
            return VPlus()
        case TimesDot():
            return VTimes()
        case Abs(pat, body):
            return VClosure(pat, body, env)
        case App(f, a):
            return apply_value(eval_term(f, env, flops),
                               eval_term(a, env, flops), flops)
        case UnitVal():
            return VUnit()
        case TopVal():
            return VTop()
        case TensorPair(l, r):
            return VPair(eval_term(l, env, flops), eval_term(r, env, flops))
        case WithPair(l, r):
            return VWith(eval_term(l, env, flops), eval_term(r, env, flops))
        case BangVal(i):
            return VBang(eval_term(i, env, flops))
    raise AssertionError(m)


def run(m: Term, env: dict | None = None) -> tuple[Value, int]:
    flops = Flops()
    v = eval_term(m, dict(env or {}), flops)
    return v, flops.count


def value_to_term(v: Value) -> Term:
    match v:
        case VNum(x):
            return Numeral(x)
        case VUnit():
            return UnitVal()
        case VTop():
            return TopVal()
        case VPair(l, r):
            return TensorPair(value_to_term(l), value_to_term(r))
        case VWith(l, r):
            return WithPair(value_to_term(l), value_to_term(r))
        case VBang(i):
            return BangVal(value_to_term(i))
    raise MachineError(f"{v!r} is not a first-order value")


def values_close(a: Value, b: Value, rel_tol: float) -> bool:
    match a, b:
        case (VNum(x), VNum(y)):
            return abs(x - y) <= rel_tol * max(1.0, abs(x), abs(y))
        case (VUnit(), VUnit()) | (VTop(), VTop()):
            return True
        case (VPair(l1, r1), VPair(l2, r2)) | (VWith(l1, r1), VWith(l2, r2)):
            return values_close(l1, l2, rel_tol) and values_close(r1, r2, rel_tol)
        case (VBang(i1), VBang(i2)):
            return values_close(i1, i2, rel_tol)
    return False
