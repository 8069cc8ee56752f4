"""Exception types shared by every stage of the checker.

Every error that can be attributed to a place in a source text carries a
``(line, column)`` location, and its string form always shows it.
"""

from __future__ import annotations

from typing import NamedTuple


class Loc(NamedTuple):
    line: int
    column: int
    file: str | None = None

    def __str__(self) -> str:
        pos = f"{self.line}:{self.column}"
        return f"{self.file}:{pos}" if self.file else pos


def _rebuild(cls, state):
    obj = cls.__new__(cls)
    obj.__dict__.update(state)
    Exception.__init__(obj, obj.format())
    return obj


class BError(Exception):
    """Base class. ``kind`` is a short stable tag used in reports."""

    kind = "error"

    def __init__(self, message: str, loc: Loc | None = None, *, kind: str | None = None,
                 source: str | None = None) -> None:
        self.message = message
        self.loc = loc
        self.source = source
        if kind is not None:
            self.kind = kind
        super().__init__(self.format())

    def format(self) -> str:
        where = ""
        source = (self.loc.file if self.loc is not None else None) or self.source
        if source:
            where = source
        if self.loc is not None:
            pos = f"{self.loc.line}:{self.loc.column}"
            where = f"{where}:{pos}" if where else f"line {self.loc.line}, column {self.loc.column}"
        return f"{where}: {self.message}" if where else self.message

    # pickle support for process pools; default Exception pickling replays args only
    def __reduce__(self):
        return (_rebuild, (self.__class__, dict(self.__dict__)))

    def __eq__(self, other):
        return type(self) is type(other) and self.__dict__ == other.__dict__

    __hash__ = Exception.__hash__


class LexError(BError):
    kind = "lexical-error"


class ParseError(BError):
    kind = "syntax-error"


class TypeCheckError(BError):
    """``kind`` is ``unknown-name`` or ``type-mismatch``."""

    kind = "type-mismatch"


class EvalError(BError):
    """Runtime failure while evaluating a rule.

    kinds: wd-apply-outside-domain, wd-not-functional, wd-empty-min-max,
    wd-not-a-sequence, wd-div-by-zero, int-overflow, unbounded-variable,
    resource-limit.
    """

    kind = "eval-error"

    def __init__(self, kind: str, message: str, loc: Loc | None = None,
                 witness: dict[str, str] | None = None) -> None:
        self.witness = witness
        super().__init__(message, loc, kind=kind)

    def format(self) -> str:
        text = f"[{self.kind}] {super().format()}"
        if self.witness:
            text += " (with " + ", ".join(f"{k}={v}" for k, v in self.witness.items()) + ")"
        return text


class RuleFileError(BError):
    """Structural problems in rule files: placeholder-out-of-range,
    duplicate-rule-id, cyclic-definition, unknown-name, name-collision."""

    kind = "rule-error"


class IngestError(BError):
    kind = "io-error"


class CsvFormatError(IngestError):
    """Row arity mismatch; ``rows`` lists every offending physical row."""

    kind = "arity-mismatch"

    def __init__(self, message: str, rows: list[int], source: str | None = None) -> None:
        self.rows = rows
        super().__init__(message, source=source)


class ConfigError(BError):
    kind = "config-error"
