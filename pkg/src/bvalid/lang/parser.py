"""Recursive-descent parser for predicates and expressions.

Predicate precedence, loosest first: ``<=>``, ``=>`` (right associative),
``or``, ``&``, then ``not``, quantifiers and atomic comparisons. Expression
precedence, loosest first: ``|->``, the relational and set operators, ``..``,
``+ -``, ``* / mod``, unary minus, postfix ``~``, application and image.
"""

from __future__ import annotations

from ..errors import Loc, ParseError
from .ast import Node
from .lexer import Token, tokenize

PRED_BINARY = {"<=>": "iff", "=>": "implies", "or": "or", "&": "and"}
COMPARE_OPS = {
    "=": "eq", "/=": "neq", "<": "lt", "<=": "le", ">": "gt", ">=": "ge",
    ":": "in", "/:": "notin", "<:": "subset", "/<:": "notsubset",
}
REL_OPS = {
    "\\/": "union", "/\\": "inter", "<|": "dom_restrict", "<<|": "dom_subtract",
    "|>": "ran_restrict", "|>>": "ran_subtract", "<+": "override", ";": "compose",
}
ADD_OPS = {"+": "add", "-": "minus"}
MUL_OPS = {"*": "times", "/": "div", "mod": "mod"}
FUNCS = {"card", "min", "max", "dom", "ran", "size", "first", "last", "prj1", "prj2"}

# tokens that may continue an expression after a closing parenthesis
_EXPR_CONTINUATION = set(COMPARE_OPS) | set(REL_OPS) | set(ADD_OPS) | set(MUL_OPS) | {
    "|->", "..", "~", "(", "["}


def _describe(tok: Token) -> str:
    if tok.kind == "eof":
        return "end of input"
    if tok.kind == "string-literal":
        return f'string "{tok.text}"'
    return repr(tok.text)


class Parser:
    """Stateful cursor over a token list. Sub-parsers stop at the first token
    they cannot use, so rule-file parsing can embed predicates."""

    def __init__(self, tokens: list[Token]) -> None:
        if not tokens or tokens[-1].kind != "eof":
            last = tokens[-1] if tokens else Token("eof", "", 1, 1)
            tokens = list(tokens) + [Token("eof", "", last.line, last.column + len(last.text), last.file)]
        self.toks = tokens
        self.pos = 0

    # -- cursor helpers -------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("operator", "punctuation", "keyword") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, text: str, what: str | None = None) -> Token:
        if not self.at(text):
            self.error(f"expected {what or repr(text)}, found {_describe(self.tok)}")
        return self.advance()

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.loc)

    def ident(self) -> Token:
        if self.tok.kind != "identifier":
            self.error(f"expected identifier, found {_describe(self.tok)}")
        return self.advance()

    def starts_expr(self) -> bool:
        t = self.tok
        if t.kind in ("integer-literal", "string-literal", "identifier", "qualified-identifier"):
            return True
        if t.kind == "keyword":
            return t.text in FUNCS or t.text in ("TRUE", "FALSE")
        return t.text in ("(", "{", "%", "-") and t.kind in ("operator", "punctuation")

    def starts_pred(self) -> bool:
        return self.starts_expr() or self.at("not", "!", "#")

    # -- predicates -----------------------------------------------------
    def pred(self) -> Node:
        return self._iff()

    def _need_pred_after(self, op: Token) -> None:
        if not self.starts_pred():
            self.error(f"predicate expected after {op.text!r}, found {_describe(self.tok)}")

    def _iff(self) -> Node:
        left = self._implies()
        while self.at("<=>"):
            op = self.advance()
            self._need_pred_after(op)
            left = Node("iff", (left, self._implies()), loc=op.loc)
        return left

    def _implies(self) -> Node:
        left = self._or()
        if self.at("=>"):
            op = self.advance()
            self._need_pred_after(op)
            return Node("implies", (left, self._implies()), loc=op.loc)
        return left

    def _or(self) -> Node:
        left = self._and()
        while self.at("or"):
            op = self.advance()
            self._need_pred_after(op)
            left = Node("or", (left, self._and()), loc=op.loc)
        return left

    def _and(self) -> Node:
        left = self._unary_pred()
        while self.at("&"):
            op = self.advance()
            self._need_pred_after(op)
            left = Node("and", (left, self._unary_pred()), loc=op.loc)
        return left

    def _unary_pred(self) -> Node:
        t = self.tok
        if self.at("not"):
            self.advance()
            self._need_pred_after(t)
            return Node("not", (self._unary_pred(),), loc=t.loc)
        if self.at("!", "#"):
            self.advance()
            names = self._bound_vars()
            self.expect(".")
            self.expect("(")
            body = self.pred()
            self.expect(")")
            return Node("forall" if t.text == "!" else "exists", (body,), bound=names, loc=t.loc)
        if self.at("("):
            start = self.pos
            try:
                self.advance()
                inner = self.pred()
                self.expect(")")
                if not self.at(*_EXPR_CONTINUATION):
                    return inner
            except ParseError as first:
                self.pos = start
                try:
                    return self._comparison()
                except ParseError as second:
                    raise first if first.loc > second.loc else second
            self.pos = start
        return self._comparison()

    def _bound_vars(self) -> tuple[str, ...]:
        if self.at("("):
            self.advance()
            names = [self.ident()]
            while self.at(","):
                self.advance()
                names.append(self.ident())
            self.expect(")")
        else:
            names = [self.ident()]
        seen = set()
        for n in names:
            if n.text in seen:
                self.error(f"variable {n.text!r} bound twice", n)
            seen.add(n.text)
        return tuple(n.text for n in names)

    def _comparison(self) -> Node:
        if not self.starts_expr():
            self.error(f"predicate expected, found {_describe(self.tok)}")
        left = self.expr()
        t = self.tok
        if t.kind == "operator" and t.text in COMPARE_OPS:
            self.advance()
            if not self.starts_expr():
                self.error(f"expression expected after {t.text!r}, found {_describe(self.tok)}")
            return Node(COMPARE_OPS[t.text], (left, self.expr()), loc=t.loc)
        if left.kind == "name":
            # a bare name used as a predicate: must be a predicate definition
            return Node("predref", value=left.value, loc=left.loc)
        self.error(f"comparison operator expected, found {_describe(t)}")

    # -- expressions ----------------------------------------------------
    def expr(self) -> Node:
        left = self._rel()
        while self.at("|->"):
            op = self.advance()
            left = Node("maplet", (left, self._operand(self._rel, op)), loc=op.loc)
        return left

    def _operand(self, sub, op: Token) -> Node:
        if not self.starts_expr():
            self.error(f"expression expected after {op.text!r}, found {_describe(self.tok)}")
        return sub()

    def _rel(self) -> Node:
        left = self._interval()
        while self.tok.kind == "operator" and self.tok.text in REL_OPS:
            op = self.advance()
            left = Node(REL_OPS[op.text], (left, self._operand(self._interval, op)), loc=op.loc)
        return left

    def _interval(self) -> Node:
        left = self._additive()
        if self.at(".."):
            op = self.advance()
            left = Node("interval", (left, self._operand(self._additive, op)), loc=op.loc)
        return left

    def _additive(self) -> Node:
        left = self._mult()
        while self.tok.kind == "operator" and self.tok.text in ADD_OPS:
            op = self.advance()
            left = Node(ADD_OPS[op.text], (left, self._operand(self._mult, op)), loc=op.loc)
        return left

    def _mult(self) -> Node:
        left = self._neg()
        while self.at(*MUL_OPS):
            op = self.advance()
            left = Node(MUL_OPS[op.text], (left, self._operand(self._neg, op)), loc=op.loc)
        return left

    def _neg(self) -> Node:
        if self.at("-"):
            op = self.advance()
            return Node("neg", (self._operand(self._neg, op),), loc=op.loc)
        return self._postfix()

    def _postfix(self) -> Node:
        e = self._primary()
        while True:
            t = self.tok
            if self.at("~"):
                self.advance()
                e = Node("inverse", (e,), loc=t.loc)
            elif self.at("("):
                self.advance()
                e = Node("apply", (e, self._tuple_until(")")), loc=t.loc)
            elif self.at("["):
                self.advance()
                arg = self._operand(self.expr, t)
                self.expect("]")
                e = Node("image", (e, arg), loc=t.loc)
            else:
                return e

    def _tuple_until(self, close: str) -> Node:
        """``a, b, c`` followed by ``close``; commas build left-nested maplets."""
        opener = self.toks[self.pos - 1]
        e = self._operand(self.expr, opener)
        while self.at(","):
            op = self.advance()
            e = Node("maplet", (e, self._operand(self.expr, op)), loc=op.loc)
        self.expect(close)
        return e

    def _primary(self) -> Node:
        t = self.tok
        if t.kind == "integer-literal":
            self.advance()
            return Node("int", value=int(t.text), loc=t.loc)
        if t.kind == "string-literal":
            self.advance()
            return Node("str", value=t.text, loc=t.loc)
        if t.kind in ("identifier", "qualified-identifier"):
            self.advance()
            return Node("name", value=t.text, loc=t.loc)
        if t.kind == "keyword":
            if t.text in ("TRUE", "FALSE"):
                self.advance()
                return Node("bool", value=t.text == "TRUE", loc=t.loc)
            if t.text in FUNCS:
                self.advance()
                self.expect("(")
                arg = self._operand(self.expr, t)
                self.expect(")")
                return Node(t.text, (arg,), loc=t.loc)
        if self.at("("):
            self.advance()
            return self._tuple_until(")")
        if self.at("{"):
            return self._braces()
        if self.at("%"):
            self.advance()
            names = self._bound_vars()
            self.expect(".")
            self.expect("(")
            guard = self.pred()
            self.expect("|")
            body = self._operand(self.expr, self.toks[self.pos - 1])
            self.expect(")")
            return Node("lambda", (guard, body), bound=names, loc=t.loc)
        self.error(f"expression expected, found {_describe(t)}")

    def _braces(self) -> Node:
        open_ = self.advance()
        if self.at("}"):
            self.advance()
            return Node("setext", (), loc=open_.loc)
        # comprehension: identifier list followed by '|'
        k = 0
        while True:
            if self.peek(k).kind != "identifier":
                break
            nxt = self.peek(k + 1)
            if nxt.kind == "operator" and nxt.text == "|":
                names = self._bound_vars_plain()
                self.expect("|")
                body = self.pred()
                self.expect("}")
                return Node("comp", (body,), bound=names, loc=open_.loc)
            if nxt.kind == "punctuation" and nxt.text == ",":
                k += 2
                continue
            break
        items = [self._operand(self.expr, open_)]
        while self.at(","):
            op = self.advance()
            items.append(self._operand(self.expr, op))
        self.expect("}", "',' or '}'")
        return Node("setext", tuple(items), loc=open_.loc)

    def _bound_vars_plain(self) -> tuple[str, ...]:
        names = [self.ident()]
        while self.at(","):
            self.advance()
            names.append(self.ident())
        seen = set()
        for n in names:
            if n.text in seen:
                self.error(f"variable {n.text!r} bound twice", n)
            seen.add(n.text)
        return tuple(n.text for n in names)

    def expect_eof(self) -> None:
        if self.tok.kind != "eof":
            self.error(f"unexpected {_describe(self.tok)}")


def _as_tokens(src) -> list[Token]:
    return tokenize(src) if isinstance(src, str) else list(src)


def parse_pred(tokens) -> Node:
    """Parse exactly one predicate. Accepts a token list or source text."""
    p = Parser(_as_tokens(tokens))
    node = p.pred()
    p.expect_eof()
    return node


def parse_expr(tokens) -> Node:
    """Parse exactly one expression. Accepts a token list or source text."""
    p = Parser(_as_tokens(tokens))
    if not p.starts_expr():
        p.error(f"expression expected, found {_describe(p.tok)}")
    node = p.expr()
    p.expect_eof()
    return node


__all__ = ["Parser", "parse_pred", "parse_expr", "Loc"]
