"""Rule files, definition expansion and rule checking.

A rule file holds top-level definitions and rules::

    DEFINITION OMAP == "Trackside OMAP"

    RULE R12
      COUNTEREXAMPLE "sector %1 has %3 OMAPs"
      ANY sector, kind, nb WHERE
        sector : ran(Sectors!Id) & kind = OMAP &
        nb = card({i | i : dom(Equipment!Sector) & Equipment!Sector(i) = sector})
      EXPECTED nb >= 1
      END
    END

Every binding of the ANY parameters that satisfies WHERE but not EXPECTED is
a counterexample and is reported with its message.
"""

from __future__ import annotations

import logging
import multiprocessing
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .errors import BError, EvalError, Loc, ParseError, RuleFileError
from .evaluator import Compiler, Env, plan_enum
from .lang.ast import Node, free_names
from .lang.lexer import tokenize
from .lang.parser import Parser
from .lang.typecheck import typecheck_block
from .values import DEFAULT_MAX_SET_SIZE, render

log = logging.getLogger(__name__)

DEFAULT_MAX_FINDINGS = 10_000

_PLACEHOLDER = re.compile(r"%(%|[0-9])")
_TOP_LEVEL = ("RULE", "DEFINITION")


@dataclass(frozen=True)
class Definition:
    name: str
    body: Node
    loc: Loc = field(default=Loc(0, 0), compare=False)
    source: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class CxBlock:
    message: str
    params: tuple[str, ...]
    where: Node
    expected: Node
    loc: Loc = field(default=Loc(0, 0), compare=False)


@dataclass(frozen=True)
class Rule:
    id: str
    blocks: tuple[CxBlock, ...]
    loc: Loc = field(default=Loc(0, 0), compare=False)
    source: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Finding:
    rule_id: str
    block: int
    message: str
    witness: dict[str, str]   # parameter -> value rendered for machine reports


@dataclass
class RuleResult:
    rule_id: str
    verdict: str                       # PASS | FAIL | ERROR
    findings: list[Finding] = field(default_factory=list)
    error: BError | None = None
    truncated: bool = False
    elapsed: float = 0.0


@dataclass(frozen=True)
class RunConfig:
    max_findings: int = DEFAULT_MAX_FINDINGS
    jobs: int = 1
    max_set_size: int = DEFAULT_MAX_SET_SIZE


# -- parsing -----------------------------------------------------------------

def _check_template(template: str, nparams: int, loc: Loc) -> None:
    for m in _PLACEHOLDER.finditer(template):
        g = m.group(1)
        after = template[m.end():m.end() + 2]
        if g == "%" and (after[:1].isdigit() or (after[:1] == "%" and after[1:].isdigit())):
            # would print "%" glued to a digit, which reads like an unresolved placeholder
            raise RuleFileError(f"'%%' followed by a digit is ambiguous in {template!r}; "
                                "put a space after '%%'", loc, kind="syntax-error")
        if g != "%" and not 1 <= int(g) <= nparams:
            raise RuleFileError(f"placeholder %{g} out of range: block has {nparams} parameter(s)",
                                loc, kind="placeholder-out-of-range")


def _definition_body(p: Parser) -> Node:
    start = p.pos
    failures = []
    for sub in (p.pred, p.expr):
        p.pos = start
        try:
            node = sub()
            if p.tok.kind == "eof" or p.at(*_TOP_LEVEL):
                return node
            p.error(f"unexpected {p.tok.text!r} in definition")
        except ParseError as e:
            failures.append(e)
    raise max(failures, key=lambda e: e.loc)


def parse_rule_file(text: str, source: str | None = None) -> tuple[list[Definition], list[Rule]]:
    p = Parser(tokenize(text, source))
    defs: list[Definition] = []
    rules: list[Rule] = []
    ids: set[str] = set()
    try:
        while p.tok.kind != "eof":
            t = p.tok
            if p.at("DEFINITION"):
                p.advance()
                name = p.ident()
                p.expect("==")
                defs.append(Definition(name.text, _definition_body(p), name.loc, source))
            elif p.at("RULE"):
                p.advance()
                idt = p.tok
                if idt.kind not in ("identifier", "integer-literal", "string-literal"):
                    p.error(f"expected rule id, found {idt.text!r}")
                p.advance()
                if idt.text in ids:
                    raise RuleFileError(f"duplicate rule id {idt.text!r}", idt.loc, kind="duplicate-rule-id")
                ids.add(idt.text)
                blocks = []
                while p.at("COUNTEREXAMPLE"):
                    blocks.append(_parse_block(p))
                if not blocks:
                    p.error("expected COUNTEREXAMPLE")
                p.expect("END", "'END' closing the rule")
                rules.append(Rule(idt.text, tuple(blocks), t.loc, source))
            else:
                p.error(f"expected RULE or DEFINITION, found {p.tok.text or 'end of input'!r}")
    except BError as e:
        if e.source is None:
            e.source = source
            Exception.__init__(e, e.format())
        raise
    return defs, rules


def _parse_block(p: Parser) -> CxBlock:
    kw = p.advance()
    msg = p.tok
    if msg.kind != "string-literal":
        p.error("expected quoted message after COUNTEREXAMPLE")
    p.advance()
    p.expect("ANY")
    params = [p.ident()]
    while p.at(","):
        p.advance()
        params.append(p.ident())
    names = [t.text for t in params]
    for i, t in enumerate(params):
        if t.text in names[:i]:
            raise ParseError(f"parameter {t.text!r} listed twice", t.loc)
    _check_template(msg.text, len(names), msg.loc)
    p.expect("WHERE")
    where = p.pred()
    p.expect("EXPECTED")
    expected = p.pred()
    p.expect("END", "'END' closing the COUNTEREXAMPLE")
    return CxBlock(msg.text, tuple(names), where, expected, kw.loc)


def load_rule_texts(texts: list[tuple[str, str]]) -> tuple[list[Definition], list[Rule]]:
    """Parse several ``(source, text)`` rule files; ids must be unique across all."""
    defs, rules = [], []
    seen: dict[str, str] = {}
    for source, text in texts:
        d, r = parse_rule_file(text, source)
        for rule in r:
            if rule.id in seen:
                raise RuleFileError(f"duplicate rule id {rule.id!r} (also in {seen[rule.id]})",
                                    rule.loc, kind="duplicate-rule-id", source=source)
            seen[rule.id] = source
        defs += d
        rules += r
    return defs, rules


# -- definitions -------------------------------------------------------------

def _find_cycle(graph: dict[str, list[str]]) -> list[str] | None:
    state: dict[str, int] = {}
    stack: list[str] = []

    def visit(n):
        state[n] = 1
        stack.append(n)
        for m in graph[n]:
            if state.get(m) == 1:
                return stack[stack.index(m):] + [m]
            if m not in state:
                found = visit(m)
                if found:
                    return found
        stack.pop()
        state[n] = 2
        return None

    for n in graph:
        if n not in state:
            found = visit(n)
            if found:
                return found
    return None


def expand_defs(defs: list[Definition], rules: list[Rule],
                data_names=None) -> list[Rule]:
    """Inline every definition reference. ``data_names``, when given, enables
    the unknown-name and name-collision checks."""
    table: dict[str, Definition] = {}
    for d in defs:
        if d.name in table:
            raise RuleFileError(f"definition {d.name!r} defined twice", d.loc,
                                kind="name-collision", source=d.source)
        if data_names is not None and d.name in data_names:
            raise RuleFileError(f"definition {d.name!r} collides with a data name", d.loc,
                                kind="name-collision", source=d.source)
        table[d.name] = d
    graph = {n: sorted(free_names(d.body) & table.keys()) for n, d in table.items()}
    cycle = _find_cycle(graph)
    if cycle:
        first = table[cycle[0]]
        raise RuleFileError("cyclic definitions: " + " -> ".join(cycle), first.loc,
                            kind="cyclic-definition", source=first.source)

    done: dict[str, Node] = {}

    def body_of(name: str) -> Node:
        if name not in done:
            d = table[name]
            done[name] = subst(d.body, frozenset(), d)
        return done[name]

    def subst(n: Node, bound: frozenset, owner) -> Node:
        if n.kind in ("name", "predref") and n.value in table and n.value not in bound:
            body = body_of(n.value)
            want_pred = n.kind == "predref"
            if want_pred and not body.is_pred:
                if body.kind != "name":
                    raise RuleFileError(f"definition {n.value!r} is an expression, used as a predicate",
                                        n.loc, kind="type-mismatch", source=_src(owner))
                body = replace(body, kind="predref")
            elif not want_pred and body.is_pred:
                if body.kind != "predref":
                    raise RuleFileError(f"definition {n.value!r} is a predicate, used as an expression",
                                        n.loc, kind="type-mismatch", source=_src(owner))
                body = replace(body, kind="name")
            captured = free_names(body) & bound
            if captured:
                raise RuleFileError(
                    f"definition {n.value!r} uses {sorted(captured)} which are rebound here",
                    n.loc, kind="name-collision", source=_src(owner))
            return body
        if not n.args:
            return n
        inner = bound | frozenset(n.bound) if n.bound else bound
        return replace(n, args=tuple(subst(a, inner, owner) for a in n.args))

    def known(n: Node, allowed, owner) -> None:
        if data_names is None:
            return
        for name in sorted(free_names(n) - set(allowed)):
            if name not in data_names:
                loc = next((m.loc for m in n.walk() if m.kind in ("name", "predref") and m.value == name),
                           n.loc)
                raise RuleFileError(f"unknown name {name!r}", loc, kind="unknown-name",
                                    source=_src(owner))

    for name in table:
        known(body_of(name), (), table[name])

    out = []
    for r in rules:
        blocks = []
        for b in r.blocks:
            if data_names is not None:
                for prm in b.params:
                    if prm in data_names or prm in table:
                        raise RuleFileError(f"parameter {prm!r} shadows a data or definition name",
                                            b.loc, kind="name-collision", source=r.source)
            where = subst(b.where, frozenset(b.params), r)
            expected = subst(b.expected, frozenset(b.params), r)
            known(where, b.params, r)
            known(expected, b.params, r)
            blocks.append(replace(b, where=where, expected=expected))
        out.append(replace(r, blocks=tuple(blocks)))
    return out


def _src(owner) -> str | None:
    return getattr(owner, "source", None)


# -- checking ----------------------------------------------------------------

def format_message(template: str, params, binding) -> str:
    """Substitute ``%k`` by the k-th parameter's value; ``%%`` gives ``%``."""
    def sub(m):
        g = m.group(1)
        if g == "%":
            return "%"
        return render(binding[params[int(g) - 1]])
    return _PLACEHOLDER.sub(sub, template)


def _verdict(findings, error) -> str:
    if error is not None:
        return "ERROR"
    return "FAIL" if findings else "PASS"


def check_rule(rule: Rule, env: Env, max_findings: int = DEFAULT_MAX_FINDINGS,
               max_set_size: int = DEFAULT_MAX_SET_SIZE) -> RuleResult:
    """Evaluate the rule's blocks in order and collect counterexamples.

    Any error (typing, unbounded variable, ill-defined expression) stops the
    rule with verdict ERROR; findings produced before it are kept.
    """
    started = time.perf_counter()
    findings: list[Finding] = []
    truncated = False
    error = None
    try:
        for index, block in enumerate(rule.blocks, start=1):
            params = block.params
            where, expected, _ = typecheck_block(block.where, block.expected, env.types, params)
            comp = Compiler(env, max_set_size)
            run, _ = comp.compile_plan(plan_enum(params, where, loc=block.loc))
            check = comp.pred(expected, frozenset(params))
            count = 0
            for b in run({}):
                try:
                    ok = check(b)
                except EvalError as e:
                    if e.witness is None:
                        e.witness = {p: render(b[p], True) for p in params}
                        Exception.__init__(e, e.format())
                    raise
                if ok:
                    continue
                if count >= max_findings:
                    truncated = True
                    break
                findings.append(Finding(rule.id, index, format_message(block.message, params, b),
                                        {p: render(b[p], True) for p in params}))
                count += 1
    except BError as e:
        if e.source is None:
            e.source = rule.source
        if isinstance(e, EvalError) and e.kind == "resource-limit" and rule.id not in e.message:
            e.message = f"rule {rule.id}: {e.message}"
        Exception.__init__(e, e.format())
        error = e
    return RuleResult(rule.id, _verdict(findings, error), findings, error, truncated,
                      time.perf_counter() - started)


_WORKER_STATE: tuple | None = None


def _worker_check(rule: Rule) -> RuleResult:
    env, cfg = _WORKER_STATE
    return check_rule(rule, env, cfg.max_findings, cfg.max_set_size)


def run_all(rules: list[Rule], env: Env, config: RunConfig = RunConfig()):
    """Check every rule once; results come back in declaration order."""
    from .report import Report, summarize

    global _WORKER_STATE
    results: list[RuleResult]
    if config.jobs > 1 and len(rules) > 1 and "fork" in multiprocessing.get_all_start_methods():
        _WORKER_STATE = (env, config)
        try:
            ctx = multiprocessing.get_context("fork")
            with ProcessPoolExecutor(max_workers=config.jobs, mp_context=ctx) as pool:
                results = list(pool.map(_worker_check, rules, chunksize=max(1, len(rules) // (4 * config.jobs))))
        finally:
            _WORKER_STATE = None
    else:
        results = [check_rule(r, env, config.max_findings, config.max_set_size) for r in rules]
    for r in results:
        log.debug("rule %s: %s (%d findings, %.3fs)", r.rule_id, r.verdict, len(r.findings), r.elapsed)
    return Report(results=results, summary=summarize(results, []))
