"""Canonical unparser. Output reparses to an equal tree."""

from __future__ import annotations

from .ast import Node

_BINARY = {
    "add": "+", "sub": "-", "minus": "-", "mul": "*", "times": "*", "cart": "*", "div": "/",
    "mod": "mod", "diff": "-", "union": "\\/", "inter": "/\\", "interval": "..", "maplet": "|->",
    "compose": ";", "override": "<+", "dom_restrict": "<|", "dom_subtract": "<<|",
    "ran_restrict": "|>", "ran_subtract": "|>>",
    "eq": "=", "neq": "/=", "lt": "<", "le": "<=", "gt": ">", "ge": ">=",
    "in": ":", "notin": "/:", "subset": "<:", "notsubset": "/<:",
    "and": "&", "or": "or", "implies": "=>", "iff": "<=>",
}


def quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _vars(names: tuple[str, ...]) -> str:
    return "(" + ",".join(names) + ")"


def unparse(n: Node) -> str:
    k = n.kind
    if k == "int":
        return str(n.value)
    if k == "str":
        return quote(n.value)
    if k == "bool":
        return "TRUE" if n.value else "FALSE"
    if k in ("name", "predref"):
        return n.value
    if k in _BINARY:
        a, b = n.args
        return f"({unparse(a)} {_BINARY[k]} {unparse(b)})"
    if k == "neg":
        return f"(-{unparse(n.args[0])})"
    if k == "not":
        return f"not({unparse(n.args[0])})"
    if k == "inverse":
        return f"({unparse(n.args[0])})~"
    if k == "apply":
        return f"({unparse(n.args[0])})({unparse(n.args[1])})"
    if k == "image":
        return f"({unparse(n.args[0])})[{unparse(n.args[1])}]"
    if k == "setext":
        return "{" + ", ".join(unparse(a) for a in n.args) + "}"
    if k == "comp":
        return "{" + ",".join(n.bound) + " | " + unparse(n.args[0]) + "}"
    if k == "lambda":
        return f"%{_vars(n.bound)}.({unparse(n.args[0])} | {unparse(n.args[1])})"
    if k in ("forall", "exists"):
        q = "!" if k == "forall" else "#"
        return f"{q}{_vars(n.bound)}.({unparse(n.args[0])})"
    # unary functions: card, dom, prj1, ...
    return f"{k}({unparse(n.args[0])})"
