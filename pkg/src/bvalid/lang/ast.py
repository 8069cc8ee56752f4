"""Abstract syntax shared by expressions and predicates.

A single ``Node`` class is used for both; ``kind`` tells them apart. Source
location and inferred type do not take part in equality, so a reparsed tree
compares equal to the original.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..errors import Loc

# expression kinds
LITERALS = {"int", "str", "bool"}
ARITH = {"add", "sub", "mul", "div", "mod"}
# '-' and '*' before the typechecker has decided between arithmetic and sets
AMBIGUOUS = {"minus", "times"}
SETOPS = {"union", "inter", "diff", "cart"}
RELOPS = {"compose", "override", "dom_restrict", "dom_subtract", "ran_restrict", "ran_subtract"}
UNARY_FUNCS = {"card", "min", "max", "dom", "ran", "size", "first", "last", "prj1", "prj2"}
EXPR_KINDS = (LITERALS | ARITH | AMBIGUOUS | SETOPS | RELOPS | UNARY_FUNCS
              | {"name", "neg", "interval", "setext", "comp", "lambda", "maplet",
                 "inverse", "image", "apply"})

# predicate kinds
COMPARE = {"eq", "neq", "lt", "le", "gt", "ge"}
MEMBERSHIP = {"in", "notin", "subset", "notsubset"}
PRED_KINDS = (COMPARE | MEMBERSHIP
              | {"and", "or", "not", "implies", "iff", "forall", "exists", "predref"})


@dataclass(frozen=True, slots=True)
class Node:
    kind: str
    args: tuple["Node", ...] = ()
    value: Any = None            # literal value or name
    bound: tuple[str, ...] = ()  # bound variables of quantifiers, comprehensions, lambdas
    loc: Loc = field(default=Loc(0, 0), compare=False)
    ty: Any = field(default=None, compare=False)

    @property
    def is_pred(self) -> bool:
        return self.kind in PRED_KINDS

    def walk(self):
        yield self
        for a in self.args:
            yield from a.walk()


def free_names(node: Node) -> set[str]:
    """Names occurring free in ``node`` (data names, definitions and outer variables)."""
    out: set[str] = set()

    def go(n: Node, bound: frozenset[str]) -> None:
        if n.kind in ("name", "predref"):
            if n.value not in bound:
                out.add(n.value)
            return
        if n.bound:
            bound = bound | set(n.bound)
        for a in n.args:
            go(a, bound)

    go(node, frozenset())
    return out


def conjuncts(p: Node) -> list[Node]:
    if p.kind == "and":
        return conjuncts(p.args[0]) + conjuncts(p.args[1])
    return [p]
