"""Registry of numeric primitives.

Every primitive is differentiable and its partial derivatives are
themselves registered primitives of the same arity, so forward mode can
always emit derivative symbols.  Arity is bounded by MAX_ARITY.

A few primitives are semantically projections or constants; the
simplifier may fold their applications (the display convention used for
the worked-example terms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

MAX_ARITY = 4


@dataclass(frozen=True)
class PrimId:
    name: str
    arity: int
    fn: Callable = field(compare=False, hash=False)
    partials: tuple[str, ...] = field(compare=False, hash=False, default=())
    # "general" | "proj" | "const"; proj_index / const_value give the folding rule
    kind: str = field(compare=False, hash=False, default="general")
    proj_index: int = field(compare=False, hash=False, default=-1)
    const_value: float = field(compare=False, hash=False, default=0.0)

    def eval(self, *args: float) -> float:
        assert len(args) == self.arity, (self.name, args)
        return self.fn(*args)

    def __repr__(self):
        return f"prim:{self.name}"


REGISTRY: dict[str, PrimId] = {}


def _register(p: PrimId) -> PrimId:
    REGISTRY[p.name] = p
    return p


def _gen(name, arity, fn, partials):
    return _register(PrimId(name, arity, fn, tuple(partials)))


def _proj(name, arity, index):
    return _register(PrimId(
        name, arity, lambda *a, _i=index: a[_i],
        tuple(["one2" if i == index else "zero2" for i in range(arity)]),
        kind="proj", proj_index=index))


def _const(name, arity, value):
    return _register(PrimId(
        name, arity, lambda *a, _v=value: _v,
        tuple(["zero2"] * arity), kind="const", const_value=value))


_const("zero2", 2, 0.0)
_const("one2", 2, 1.0)
_const("negone2", 2, -1.0)
_proj("proj1of2", 2, 0)
_proj("proj2of2", 2, 1)

_gen("sin", 1, math.sin, ["cos"])
_gen("cos", 1, math.cos, ["negsin"])
_gen("negsin", 1, lambda x: -math.sin(x), ["negcos"])
_gen("negcos", 1, lambda x: -math.cos(x), ["sin"])
_gen("exp", 1, math.exp, ["exp"])
_gen("add2", 2, lambda x, y: x + y, ["one2", "one2"])
_gen("sub2", 2, lambda x, y: x - y, ["one2", "negone2"])
_gen("mul2", 2, lambda x, y: x * y, ["proj2of2", "proj1of2"])


def prim(name: str) -> PrimId:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown primitive {name!r}") from None


def partial_of(p: PrimId, i: int) -> PrimId:
    """The symbol for the i-th partial derivative (0-based)."""
    return REGISTRY[p.partials[i]]


for _p in list(REGISTRY.values()):
    assert len(_p.partials) == _p.arity, _p
    for _d in _p.partials:
        assert _d in REGISTRY, (_p.name, _d)
    assert 1 <= _p.arity <= MAX_ARITY
