"""Static flop bound and the safety predicate.

The workload of a term counts numeric operations outside any bang plus
the numerals an erasing abstraction may discard; on safe closed terms it
bounds the number of numeric steps of any maximal safe reduction.
"""

from __future__ import annotations

from linlog.lll.terms import (
    Abs, App, BangVal, Numeral, PlusDot, PrimFn, Term, TensorPair, TimesDot,
    TopVal, UnitVal, Var, WithPair, Zero, free_vars, pattern_var_types,
)
from linlog.lll.types import LType, is_ground, workload_type


def workload_term(m: Term) -> int:
    match m:
        case PrimFn(_) | PlusDot() | TimesDot():
            return 1
        case Var(_) | BangVal(_) | UnitVal() | TopVal() | Numeral(_) | Zero():
            return 0
        case Abs(p, body):
            fv = free_vars(body)
            erased = sum(workload_type(ty)
                         for x, ty in pattern_var_types(p).items() if x not in fv)
            return workload_term(body) + erased
        case App(f, a) | TensorPair(f, a) | WithPair(f, a):
            return workload_term(f) + workload_term(a)
    raise AssertionError(m)


def is_safe(m: Term, var_types: dict[str, LType] | None = None) -> bool:
    """Definition-of-safety check: no workload under a bang, and additive
    pairs share only ground variables.  `var_types` gives the resource
    types of the term's free variables (needed for the ground test)."""
    types = dict(var_types or {})

    def go(t, types):
        match t:
            case BangVal(i):
                return workload_term(i) == 0 and go(i, types)
            case WithPair(l, r):
                shared = free_vars(l) & free_vars(r)
                for x in shared:
                    ty = types.get(x)
                    if ty is None or not is_ground(ty):
                        return False
                return go(l, types) and go(r, types)
            case Abs(p, body):
                return go(body, types | pattern_var_types(p))
            case App(f, a) | TensorPair(f, a):
                return go(f, types) and go(a, types)
            case _:
                return True

    return go(m, types)
