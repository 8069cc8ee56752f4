"""Evaluation of typed predicates and expressions, and exhaustive enumeration
of the bindings that satisfy a predicate.

Typed trees are compiled once into Python closures taking a dict of local
bindings. Names that are not locally bound resolve to the (immutable) global
environment at compile time, and any subexpression with no local variables is
computed at most once per compiled tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Callable, Iterator, Mapping

from . import values as V
from .errors import EvalError, Loc
from .lang.ast import Node, conjuncts, free_names
from .lang.types import BType
from .values import BSet, INT_MAX, INT_MIN, apply_fn, mk_set, render


class Env:
    """Global name -> value frame with optional lexical frames on top."""

    def __init__(self, values: Mapping[str, Any], types: Mapping[str, BType] | None = None,
                 frames: tuple[Mapping[str, Any], ...] = ()) -> None:
        self.globals = MappingProxyType(dict(values))
        self.types = MappingProxyType(dict(types or {}))
        self.frames = frames

    def bind(self, frame: Mapping[str, Any]) -> "Env":
        child = Env.__new__(Env)
        child.globals = self.globals
        child.types = self.types
        child.frames = (dict(frame),) + self.frames
        return child

    def lookup(self, name: str):
        for f in self.frames:
            if name in f:
                return f[name]
        return self.globals[name]

    def __contains__(self, name: str) -> bool:
        return any(name in f for f in self.frames) or name in self.globals


@dataclass(frozen=True)
class Generator:
    var: str
    expr: Node
    kind: str  # member-of | equals


@dataclass(frozen=True)
class EnumPlan:
    vars: tuple[str, ...]
    generators: tuple[Generator, ...]
    filters: tuple[Node, ...] = field(default=())


def plan_enum(vars, where: Node, env: Env | None = None, loc: Loc | None = None) -> EnumPlan:
    """Order the conjuncts of ``where`` into generators and residual filters.

    Scans the conjunct list left to right and takes the first ``v : E`` or
    ``v = E`` whose expression only uses already generated variables, then
    rescans. Whatever is left over is a filter, kept in source order.
    """
    vars = tuple(vars)
    varset = set(vars)
    cs = conjuncts(where)
    used: set[int] = set()
    bound: set[str] = set()
    gens: list[Generator] = []
    while len(bound) < len(vars):
        for i, c in enumerate(cs):
            if i in used or c.kind not in ("in", "eq"):
                continue
            lhs, rhs = c.args
            if lhs.kind != "name" or lhs.value not in varset or lhs.value in bound:
                continue
            if (free_names(rhs) & varset) <= bound:
                gens.append(Generator(lhs.value, rhs, "member-of" if c.kind == "in" else "equals"))
                used.add(i)
                bound.add(lhs.value)
                break
        else:
            missing = next(v for v in vars if v not in bound)
            raise EvalError("unbounded-variable",
                            f"variable {missing!r} is not bounded by a 'v : E' or 'v = E' conjunct",
                            loc or where.loc)
    return EnumPlan(vars, tuple(gens), tuple(c for i, c in enumerate(cs) if i not in used))


def _at(e: EvalError, loc: Loc) -> EvalError:
    if e.loc is None:
        e.loc = loc
        Exception.__init__(e, e.format())
    return e


def _overflow(loc):
    return EvalError("int-overflow", "integer result outside the signed 64-bit range", loc)


def _div(x: int, y: int, loc) -> int:
    if y == 0:
        raise EvalError("wd-div-by-zero", "division by zero", loc)
    q = abs(x) // abs(y)
    q = q if (x >= 0) == (y >= 0) else -q
    if q > INT_MAX:
        raise _overflow(loc)
    return q


def _mod(x: int, y: int, loc) -> int:
    if y == 0:
        raise EvalError("wd-div-by-zero", "modulo by zero", loc)
    return x - y * _div(x, y, loc)


def _once(fn):
    box = []

    def cached(b):
        if box:
            return box[0]
        v = fn(b)
        box.append(v)
        return v
    return cached


_CMP = {
    "lt": lambda x, y: x < y,
    "le": lambda x, y: x <= y,
    "gt": lambda x, y: x > y,
    "ge": lambda x, y: x >= y,
}

_SET_BINARY = {
    "union": V.union, "inter": V.inter, "diff": V.diff, "image": V.image,
    "compose": V.compose, "override": V.override,
    "dom_restrict": V.REL_OPS["dom-restrict"], "dom_subtract": V.REL_OPS["dom-subtract"],
    "ran_restrict": V.REL_OPS["ran-restrict"], "ran_subtract": V.REL_OPS["ran-subtract"],
}

_UNARY = {
    "card": len, "min": V.REL_OPS["min"], "max": V.REL_OPS["max"],
    "dom": V.REL_OPS["dom"], "ran": V.REL_OPS["ran"], "inverse": V.REL_OPS["inverse"],
    "size": V.size, "first": V.first, "last": V.last,
    "prj1": lambda p: p[0], "prj2": lambda p: p[1],
}
# unary operators that can fail and therefore need a location attached
_UNARY_FALLIBLE = {"min", "max", "size", "first", "last"}


class Compiler:
    """Turns typed trees into closures ``fn(bindings) -> value``.

    Each ``compile_*`` method returns ``(fn, deps)`` where ``deps`` is the set
    of locally bound names the node reads.
    """

    def __init__(self, env: Env, max_set_size: int = V.DEFAULT_MAX_SET_SIZE) -> None:
        self.env = env
        self.limit = max_set_size

    def pred(self, n: Node, scope: frozenset = frozenset()) -> Callable[[dict], bool]:
        return self._pred(n, scope)[0]

    def expr(self, n: Node, scope: frozenset = frozenset()) -> Callable[[dict], Any]:
        return self._expr(n, scope)[0]

    # -- expressions -----------------------------------------------------
    def _expr(self, n: Node, scope: frozenset):
        fn, deps = self._expr_raw(n, scope)
        if not deps and n.kind not in ("int", "str", "bool", "name"):
            fn = _once(fn)
        return fn, deps

    def _expr_raw(self, n: Node, scope: frozenset):
        k = n.kind
        loc = n.loc
        if k in ("int", "str", "bool"):
            v = n.value
            return (lambda b: v), frozenset()
        if k == "name":
            name = n.value
            if name in scope:
                return (lambda b: b[name]), frozenset((name,))
            v = self.env.lookup(name)
            return (lambda b: v), frozenset()
        if k in ("comp", "lambda"):
            return self._comprehension(n, scope)
        subs = [self._expr(a, scope) for a in n.args]
        deps = frozenset().union(*(d for _, d in subs)) if subs else frozenset()
        fns = [f for f, _ in subs]

        if k in ("add", "sub", "mul"):
            f, g = fns
            if k == "add":
                def fn(b):
                    r = f(b) + g(b)
                    if INT_MIN <= r <= INT_MAX:
                        return r
                    raise _overflow(loc)
            elif k == "sub":
                def fn(b):
                    r = f(b) - g(b)
                    if INT_MIN <= r <= INT_MAX:
                        return r
                    raise _overflow(loc)
            else:
                def fn(b):
                    r = f(b) * g(b)
                    if INT_MIN <= r <= INT_MAX:
                        return r
                    raise _overflow(loc)
            return fn, deps
        if k == "div":
            f, g = fns
            return (lambda b: _div(f(b), g(b), loc)), deps
        if k == "mod":
            f, g = fns
            return (lambda b: _mod(f(b), g(b), loc)), deps
        if k == "neg":
            (f,) = fns

            def fn(b):
                r = -f(b)
                if r > INT_MAX:
                    raise _overflow(loc)
                return r
            return fn, deps
        if k == "maplet":
            f, g = fns
            return (lambda b: (f(b), g(b))), deps
        if k == "setext":
            if len(fns) == 1:
                (f,) = fns
                return (lambda b: BSet((f(b),))), deps
            return (lambda b: mk_set([f(b) for f in fns])), deps
        if k == "interval":
            f, g = fns
            limit = self.limit

            def fn(b):
                try:
                    return V.interval(f(b), g(b), limit)
                except EvalError as e:
                    raise _at(e, loc)
            return fn, deps
        if k == "cart":
            f, g = fns
            limit = self.limit

            def fn(b):
                try:
                    return V.cartesian(f(b), g(b), limit)
                except EvalError as e:
                    raise _at(e, loc)
            return fn, deps
        if k in _SET_BINARY:
            op = _SET_BINARY[k]
            f, g = fns
            return (lambda b: op(f(b), g(b))), deps
        if k == "apply":
            f, g = fns

            def fn(b):
                try:
                    return apply_fn(f(b), g(b))
                except EvalError as e:
                    raise _at(e, loc)
            return fn, deps
        if k in _UNARY:
            op = _UNARY[k]
            (f,) = fns
            if k in _UNARY_FALLIBLE:
                def fn(b):
                    try:
                        return op(f(b))
                    except EvalError as e:
                        raise _at(e, loc)
                return fn, deps
            return (lambda b: op(f(b))), deps
        raise EvalError("resource-limit", f"cannot evaluate node kind {k!r}", loc)  # pragma: no cover

    def _comprehension(self, n: Node, scope: frozenset):
        names = n.bound
        inner = scope | frozenset(names)
        guard = n.args[0]
        run, deps = self._plan(names, guard, scope, n.loc)
        if n.kind == "comp":
            if len(names) == 1:
                (v,) = names

                def collect(b):
                    return mk_set([bb[v] for bb in run(b)])
            else:
                def collect(b):
                    out = []
                    for bb in run(b):
                        t = bb[names[0]]
                        for nm in names[1:]:
                            t = (t, bb[nm])
                        out.append(t)
                    return mk_set(out)
            return collect, deps
        body, bdeps = self._expr(n.args[1], inner)
        deps = deps | (bdeps - frozenset(names))

        def collect_lambda(b):
            out = []
            for bb in run(b):
                t = bb[names[0]]
                for nm in names[1:]:
                    t = (t, bb[nm])
                out.append((t, body(bb)))
            return mk_set(out)
        return collect_lambda, deps

    # -- enumeration -----------------------------------------------------
    def _plan(self, names, where: Node, scope: frozenset, loc: Loc):
        """Compile the enumeration of ``names`` over ``where``.

        Returns ``(run, deps)``; ``run(b)`` yields one dict per satisfying
        binding. The dict is reused between yields.
        """
        plan = plan_enum(names, where, loc=loc)
        return self.compile_plan(plan, scope)

    def compile_plan(self, plan: EnumPlan, scope: frozenset = frozenset()):
        names = plan.vars
        nameset = frozenset(names)
        steps = []
        deps: frozenset = frozenset()
        cur = scope - nameset
        for g in plan.generators:
            f, d = self._expr(g.expr, cur)
            deps |= d - nameset
            steps.append((g.var, f, g.kind == "equals"))
            cur = cur | {g.var}
        full = scope | nameset
        filters = []
        for c in plan.filters:
            f, d = self._pred(c, full)
            deps |= d - nameset
            filters.append(f)
        n = len(steps)
        order = [s[0] for s in steps]

        def witness(b, depth):
            return {v: render(b[v], True) for v in order[:depth] if v in b}

        def rec(i, b):
            depth = i
            try:
                if i == n:
                    for f in filters:
                        if not f(b):
                            return
                    yield b
                    return
                var, f, is_eq = steps[i]
                if is_eq:
                    b[var] = f(b)
                    depth = i + 1
                    yield from rec(i + 1, b)
                    return
                s = f(b)
                depth = i + 1
                if i == n - 1:
                    for v in s.elems:
                        b[var] = v
                        for ff in filters:
                            if not ff(b):
                                break
                        else:
                            yield b
                    return
                for v in s.elems:
                    b[var] = v
                    yield from rec(i + 1, b)
            except EvalError as e:
                if e.witness is None:
                    e.witness = witness(b, depth) or None
                    Exception.__init__(e, e.format())
                raise

        def run(b):
            return rec(0, dict(b))
        return run, deps

    # -- predicates ------------------------------------------------------
    def _pred(self, n: Node, scope: frozenset):
        fn, deps = self._pred_raw(n, scope)
        if not deps:
            fn = _once(fn)
        return fn, deps

    def _pred_raw(self, n: Node, scope: frozenset):
        k = n.kind
        if k in ("forall", "exists"):
            return self._quantifier(n, scope)
        if k in ("and", "or", "implies", "iff", "not"):
            subs = [self._pred(a, scope) for a in n.args]
            deps = frozenset().union(*(d for _, d in subs))
            if k == "not":
                f = subs[0][0]
                return (lambda b: not f(b)), deps
            f, g = subs[0][0], subs[1][0]
            if k == "and":
                return (lambda b: f(b) and g(b)), deps
            if k == "or":
                return (lambda b: f(b) or g(b)), deps
            if k == "implies":
                return (lambda b: (not f(b)) or g(b)), deps
            return (lambda b: f(b) == g(b)), deps
        (f, d1), (g, d2) = (self._expr(a, scope) for a in n.args)
        deps = d1 | d2
        if k == "eq":
            return (lambda b: f(b) == g(b)), deps
        if k == "neq":
            return (lambda b: f(b) != g(b)), deps
        if k in _CMP:
            op = _CMP[k]
            return (lambda b: op(f(b), g(b))), deps
        if k == "in":
            return (lambda b: f(b) in g(b).members), deps
        if k == "notin":
            return (lambda b: f(b) not in g(b).members), deps
        if k == "subset":
            return (lambda b: f(b).members <= g(b).members), deps
        if k == "notsubset":
            return (lambda b: not (f(b).members <= g(b).members)), deps
        raise EvalError("resource-limit", f"cannot evaluate predicate kind {k!r}", n.loc)  # pragma: no cover

    def _quantifier(self, n: Node, scope: frozenset):
        names = n.bound
        body = n.args[0]
        if n.kind == "exists":
            run, deps = self._plan(names, body, scope, n.loc)

            def exists(b):
                for _ in run(b):
                    return True
                return False
            return exists, deps
        if body.kind != "implies":
            raise EvalError("unbounded-variable",
                            "universal quantification needs the form !(x).(x : S & ... => P)", n.loc)
        run, deps = self._plan(names, body.args[0], scope, n.loc)
        concl, cdeps = self._pred(body.args[1], scope | frozenset(names))
        deps = deps | (cdeps - frozenset(names))

        def forall(b):
            for bb in run(b):
                if not concl(bb):
                    return False
            return True
        return forall, deps


def eval_expr(e: Node, env: Env, max_set_size: int = V.DEFAULT_MAX_SET_SIZE):
    return Compiler(env, max_set_size).expr(e)({})


def eval_pred(p: Node, env: Env, max_set_size: int = V.DEFAULT_MAX_SET_SIZE) -> bool:
    return Compiler(env, max_set_size).pred(p)({})


def enumerate_bindings(plan: EnumPlan, env: Env,
                       max_set_size: int = V.DEFAULT_MAX_SET_SIZE) -> Iterator[dict]:
    """Yield every binding of ``plan.vars`` satisfying the planned predicate,
    outer generator varying slowest."""
    run, _ = Compiler(env, max_set_size).compile_plan(plan)
    for b in run({}):
        yield {v: b[v] for v in plan.vars}
