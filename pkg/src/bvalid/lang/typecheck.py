"""Type inference by unification.

Bound variables start as type variables and are fixed by the predicates that
mention them, which is how ``x : S`` types ``x``. The ambiguous ``-`` and
``*`` are resolved here: set difference and cartesian product when the
operands are sets, arithmetic otherwise.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Mapping

from ..errors import TypeCheckError
from .ast import Node, PRED_KINDS
from .types import BOOL, INT, STRING, UNKNOWN, BType, pair_of, set_of


class TVar:
    __slots__ = ("ref", "n")
    _counter = 0

    def __init__(self) -> None:
        self.ref = None
        TVar._counter += 1
        self.n = TVar._counter

    def __repr__(self) -> str:
        return f"?{self.n}"


def _resolve(t):
    while isinstance(t, TVar) and t.ref is not None:
        t = t.ref
    return t


def _show(t) -> str:
    t = _resolve(t)
    if isinstance(t, TVar):
        return "?"
    if t.kind == "pair":
        return f"({_show(t.args[0])} * {_show(t.args[1])})"
    if t.kind == "set":
        return f"POW({_show(t.args[0])})"
    return str(t)


def _zonk(t) -> BType:
    t = _resolve(t)
    if isinstance(t, TVar):
        return UNKNOWN
    if t.args:
        return BType(t.kind, tuple(_zonk(a) for a in t.args))
    return t


def _occurs(v: TVar, t) -> bool:
    t = _resolve(t)
    if t is v:
        return True
    return isinstance(t, BType) and any(_occurs(v, a) for a in t.args)


class _Checker:
    def __init__(self, env: Mapping[str, BType]) -> None:
        self.env = env

    def mismatch(self, node: Node, expected, found):
        raise TypeCheckError(
            f"type mismatch: expected {_show(expected)}, found {_show(found)}",
            node.loc, kind="type-mismatch")

    def unify(self, a, b, node: Node, expected=None, found=None) -> None:
        ra, rb = _resolve(a), _resolve(b)
        if ra is rb:
            return
        if isinstance(ra, TVar):
            if _occurs(ra, rb):
                self.mismatch(node, expected or a, found or b)
            ra.ref = rb
            return
        if isinstance(rb, TVar):
            if _occurs(rb, ra):
                self.mismatch(node, expected or a, found or b)
            rb.ref = ra
            return
        if ra.kind != rb.kind or len(ra.args) != len(rb.args):
            self.mismatch(node, expected or a, found or b)
        for x, y in zip(ra.args, rb.args):
            self.unify(x, y, node, expected or a, found or b)

    def expect(self, node: Node, t, want) -> None:
        self.unify(want, t, node)

    def rel_parts(self, node: Node, t):
        a, b = TVar(), TVar()
        self.unify(set_of(pair_of(a, b)), t, node)
        return a, b

    def elem(self, node: Node, t):
        e = TVar()
        self.unify(set_of(e), t, node)
        return e

    def bind(self, names, scope):
        inner = dict(scope)
        for n in names:
            inner[n] = TVar()
        return inner

    def tuple_type(self, names, scope):
        t = scope[names[0]]
        for n in names[1:]:
            t = pair_of(t, scope[n])
        return t

    # returns (node-with-raw-type, raw type)
    def check(self, n: Node, scope: dict):
        k = n.kind
        sub = [None] * len(n.args)
        types = [None] * len(n.args)
        inner = scope
        if n.bound:
            inner = self.bind(n.bound, scope)
        if k not in ("minus", "times"):
            for i, a in enumerate(n.args):
                sub[i], types[i] = self.check(a, inner)
        t = None
        if k == "int":
            t = INT
        elif k == "str":
            t = STRING
        elif k == "bool":
            t = BOOL
        elif k == "name":
            if n.value not in scope:
                raise TypeCheckError(f"unknown name {n.value!r}", n.loc, kind="unknown-name")
            t = scope[n.value]
        elif k == "predref":
            raise TypeCheckError(f"unknown predicate {n.value!r}", n.loc, kind="unknown-name")
        elif k in ("add", "sub", "mul", "div", "mod", "neg"):
            for a, at in zip(n.args, types):
                self.expect(a, at, INT)
            t = INT
        elif k in ("minus", "times"):
            for i, a in enumerate(n.args):
                sub[i], types[i] = self.check(a, scope)
            r0, r1 = _resolve(types[0]), _resolve(types[1])
            is_set = any(isinstance(r, BType) and r.kind == "set" for r in (r0, r1))
            if is_set and k == "minus":
                k = "diff"
                self.unify(types[0], types[1], n)
                self.elem(n, types[0])
                t = types[0]
            elif is_set:
                k = "cart"
                t = set_of(pair_of(self.elem(n.args[0], types[0]), self.elem(n.args[1], types[1])))
            else:
                k = "sub" if k == "minus" else "mul"
                for a, at in zip(n.args, types):
                    self.expect(a, at, INT)
                t = INT
        elif k == "interval":
            for a, at in zip(n.args, types):
                self.expect(a, at, INT)
            t = set_of(INT)
        elif k == "setext":
            e = TVar()
            for a, at in zip(n.args, types):
                self.unify(e, at, a)
            t = set_of(e)
        elif k == "comp":
            self.expect(n.args[0], types[0], BOOL)
            t = set_of(self.tuple_type(n.bound, inner))
        elif k == "lambda":
            self.expect(n.args[0], types[0], BOOL)
            t = set_of(pair_of(self.tuple_type(n.bound, inner), types[1]))
        elif k == "maplet":
            t = pair_of(types[0], types[1])
        elif k in ("union", "inter"):
            self.elem(n, types[0])
            self.unify(types[0], types[1], n)
            t = types[0]
        elif k == "card":
            self.elem(n, types[0])
            t = INT
        elif k in ("min", "max"):
            self.expect(n, types[0], set_of(INT))
            t = INT
        elif k == "dom":
            t = set_of(self.rel_parts(n, types[0])[0])
        elif k == "ran":
            t = set_of(self.rel_parts(n, types[0])[1])
        elif k == "inverse":
            a, b = self.rel_parts(n, types[0])
            t = set_of(pair_of(b, a))
        elif k == "image":
            a, b = self.rel_parts(n, types[0])
            self.expect(n.args[1], types[1], set_of(a))
            t = set_of(b)
        elif k == "compose":
            a, b = self.rel_parts(n, types[0])
            b2, c = self.rel_parts(n, types[1])
            self.unify(b, b2, n)
            t = set_of(pair_of(a, c))
        elif k == "override":
            self.rel_parts(n, types[0])
            self.unify(types[0], types[1], n)
            t = types[0]
        elif k in ("dom_restrict", "dom_subtract"):
            a, _ = self.rel_parts(n.args[1], types[1])
            self.expect(n.args[0], types[0], set_of(a))
            t = types[1]
        elif k in ("ran_restrict", "ran_subtract"):
            _, b = self.rel_parts(n.args[0], types[0])
            self.expect(n.args[1], types[1], set_of(b))
            t = types[0]
        elif k == "apply":
            a, b = self.rel_parts(n.args[0], types[0])
            self.expect(n.args[1], types[1], a)
            t = b
        elif k == "size":
            self.rel_parts(n, types[0])
            self.unify(set_of(pair_of(INT, TVar())), types[0], n)
            t = INT
        elif k in ("first", "last"):
            e = TVar()
            self.unify(set_of(pair_of(INT, e)), types[0], n)
            t = e
        elif k in ("prj1", "prj2"):
            a, b = TVar(), TVar()
            self.unify(pair_of(a, b), types[0], n)
            t = a if k == "prj1" else b
        elif k in ("and", "or", "implies", "iff", "not", "forall", "exists"):
            for a, at in zip(n.args, types):
                self.expect(a, at, BOOL)
            t = BOOL
        elif k in ("eq", "neq"):
            self.unify(types[0], types[1], n)
            t = BOOL
        elif k in ("lt", "le", "gt", "ge"):
            for a, at in zip(n.args, types):
                self.expect(a, at, INT)
            t = BOOL
        elif k in ("in", "notin"):
            self.unify(set_of(types[0]), types[1], n)
            t = BOOL
        elif k in ("subset", "notsubset"):
            self.elem(n, types[0])
            self.unify(types[0], types[1], n)
            t = BOOL
        else:  # pragma: no cover
            raise TypeCheckError(f"unsupported construct {k}", n.loc)
        return replace(n, kind=k, args=tuple(sub), ty=t), t


def _finish(n: Node) -> Node:
    return replace(n, args=tuple(_finish(a) for a in n.args), ty=_zonk(n.ty))


def typecheck(ast: Node, type_env: Mapping[str, BType], expect_pred: bool | None = None) -> Node:
    """Return a copy of ``ast`` with every node's ``ty`` filled in.

    ``expect_pred`` forces the root to be a predicate (True) or an
    expression (False); by default the root's own kind decides.
    """
    if expect_pred is True and not ast.is_pred:
        raise TypeCheckError("predicate expected, found an expression", ast.loc)
    if expect_pred is False and ast.is_pred:
        raise TypeCheckError("expression expected, found a predicate", ast.loc)
    checker = _Checker(type_env)
    typed, _ = checker.check(ast, dict(type_env))
    return _finish(typed)


def typecheck_block(where: Node, expected: Node, type_env: Mapping[str, BType], names):
    """Typecheck a WHERE/EXPECTED pair sharing the parameters ``names``."""
    checker = _Checker(type_env)
    scope = dict(type_env)
    tvars = {}
    for name in names:
        tvars[name] = scope[name] = TVar()
    out = []
    for p in (where, expected):
        if not p.is_pred:
            raise TypeCheckError("predicate expected, found an expression", p.loc)
        typed, _ = checker.check(p, scope)
        out.append(typed)
    return _finish(out[0]), _finish(out[1]), {k: _zonk(v) for k, v in tvars.items()}


__all__ = ["typecheck", "typecheck_block", "PRED_KINDS"]
