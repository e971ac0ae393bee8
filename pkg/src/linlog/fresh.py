"""Deterministic fresh-name generation.

All transformation-introduced variables start with the reserved prefix
"%" which the surface parser rejects, so generated names can never
collide with user-written ones.  A supply is passed explicitly to every
transformation that needs one; two runs with fresh supplies produce
identical output.
"""

RESERVED_PREFIX = "%"


class NameSupply:
    def __init__(self, start: int = 0):
        self._next = start

    def fresh(self, hint: str = "v") -> str:
        hint = hint.lstrip(RESERVED_PREFIX).split("#")[0] or "v"
        self._next += 1
        return f"{RESERVED_PREFIX}{hint}#{self._next}"

    def clone(self) -> "NameSupply":
        return NameSupply(self._next)


def is_reserved(name: str) -> bool:
    return name.startswith(RESERVED_PREFIX)
