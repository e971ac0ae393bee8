"""Denotational semantics: the primal and tangent value of an expression."""

from __future__ import annotations

from linlog.linear_a.expr import (
    AddDot, Drop, Dup, Expr, LetPair, Lit, PrimApp, PrimTupElim0,
    PrimTupElim2, PrimTupIntro0, PrimTupIntro2, ScaleDot, TanTupElim0,
    TanTupElim2, TanTupIntro0, TanTupIntro2, VarPair, ZeroDot,
)
from linlog.linear_a.values import (
    NPair, NumTuple, Scalar, ShapeMismatch, UnitTup, nt_add, nt_scale, zero_of,
)


def eval_primal(e: Expr, renv: dict[str, NumTuple]) -> NumTuple:
    match e:
        case VarPair(x, _):
            return renv[x]
        case LetPair(x, _, bound, body):
            return eval_primal(body, renv | {x: eval_primal(bound, renv)})
        case PrimTupIntro0() | TanTupIntro0() | TanTupIntro2(_, _):
            return UnitTup
        case PrimTupIntro2(x1, x2):
            return NPair(renv[x1], renv[x2])
        case PrimTupElim0(_, body):
            return eval_primal(body, renv)
        case PrimTupElim2(x1, x2, z, body):
            v = renv[z]
            if not isinstance(v, NPair):
                raise ShapeMismatch(f"{z} holds {v!r}, expected a pair")
            return eval_primal(body, renv | {x1: v.left, x2: v.right})
        case TanTupElim0(_, body) | TanTupElim2(_, _, _, body):
            return eval_primal(body, renv)
        case Lit(v):
            return Scalar(v)
        case PrimApp(f, args):
            vals = []
            for x in args:
                v = renv[x]
                if not isinstance(v, Scalar):
                    raise ShapeMismatch(f"{x} holds {v!r}, expected a scalar")
                vals.append(v.value)
            return Scalar(f.eval(*vals))
        case ZeroDot(_) | AddDot(_, _) | ScaleDot(_, _) | Dup(_) | Drop(_):
            return UnitTup
    raise AssertionError(e)


def eval_tangent(e: Expr, renv: dict[str, NumTuple],
                 senv: dict[str, NumTuple]) -> NumTuple:
    match e:
        case VarPair(_, t):
            return senv[t]
        case LetPair(x, t, bound, body):
            return eval_tangent(
                body,
                renv | {x: eval_primal(bound, renv)},
                senv | {t: eval_tangent(bound, renv, senv)})
        case PrimTupIntro0() | TanTupIntro0() | PrimTupIntro2(_, _):
            return UnitTup
        case TanTupIntro2(t1, t2):
            return NPair(senv[t1], senv[t2])
        case PrimTupElim0(_, body):
            return eval_tangent(body, renv, senv)
        case PrimTupElim2(x1, x2, z, body):
            v = renv[z]
            return eval_tangent(body, renv | {x1: v.left, x2: v.right}, senv)
        case TanTupElim0(_, body):
            return eval_tangent(body, renv, senv)
        case TanTupElim2(t1, t2, z, body):
            v = senv[z]
            if not isinstance(v, NPair):
                raise ShapeMismatch(f"{z} holds {v!r}, expected a pair")
            return eval_tangent(body, renv, senv | {t1: v.left, t2: v.right})
        case Lit(_) | PrimApp(_, _):
            return UnitTup
        case ZeroDot(t):
            return zero_of(t)
        case AddDot(t1, t2):
            return nt_add(senv[t1], senv[t2])
        case ScaleDot(x, t):
            v = renv[x]
            if not isinstance(v, Scalar):
                raise ShapeMismatch(f"{x} holds {v!r}, expected a scalar")
            return nt_scale(v.value, senv[t])
        case Dup(t):
            return NPair(senv[t], senv[t])
        case Drop(_):
            return UnitTup
    raise AssertionError(e)
