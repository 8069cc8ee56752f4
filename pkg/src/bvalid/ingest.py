"""CSV loading and binding of declared data items.

A data item ``File!Column`` is one CSV column read as the sequence
``{1|->v1, ..., n|->vn}`` of its body cells.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CsvFormatError, IngestError, ParseError
from .evaluator import Env
from .lang.lexer import tokenize
from .lang.parser import Parser
from .lang.types import BASIC, BOOL, INT, BType, seq_of
from .values import INT_MAX, INT_MIN, BSet

_INT_RE = re.compile(r"[+-]?[0-9]+\Z")


@dataclass(frozen=True)
class Dialect:
    delimiter: str = ";"
    quotechar: str = '"'


@dataclass
class CsvTable:
    path: Path
    header: list[str]
    rows: list[list[str]]
    dialect: Dialect = field(default_factory=Dialect)


@dataclass(frozen=True)
class DataDecl:
    name: str          # FileStem!Column
    elem_type: BType   # INT, BOOL or STRING
    source: str        # path relative to the data directory
    column: str        # header text in the CSV file

    @property
    def btype(self) -> BType:
        return seq_of(self.elem_type)


@dataclass(frozen=True)
class DataIssue:
    decl: str
    row: int | None    # 1-based body row; None when not tied to a row
    cell: str
    reason: str        # not-an-integer | not-a-boolean | missing-column | arity-mismatch | overflow

    def __str__(self) -> str:
        where = f" row {self.row}" if self.row is not None else ""
        cell = f" (cell {self.cell!r})" if self.row is not None else ""
        return f"{self.decl}{where}: {self.reason}{cell}"


class DataBindingError(IngestError):
    kind = "data-issues"

    def __init__(self, issues: list[DataIssue]) -> None:
        self.issues = issues
        super().__init__(f"{len(issues)} data issue(s)")


def read_csv(path, dialect: Dialect = Dialect()) -> CsvTable:
    """Read a UTF-8 CSV file (BOM tolerated); the first record is the header."""
    path = Path(path)
    records = []
    with open(path, encoding="utf-8-sig", newline="") as fh:
        reader = csv.reader(fh, delimiter=dialect.delimiter, quotechar=dialect.quotechar,
                            doublequote=True, strict=True)
        try:
            for rec in reader:
                records.append(rec)
        except csv.Error as e:
            raise CsvFormatError(f"malformed CSV at row {len(records) + 1}: {e}",
                                 [len(records) + 1], source=str(path)) from None
    while records and records[-1] == []:
        records.pop()
    if not records:
        raise CsvFormatError("file has no header row", [1], source=str(path))
    header = records[0]
    if len(set(header)) != len(header):
        dup = sorted({h for h in header if header.count(h) > 1})
        raise CsvFormatError(f"duplicate column names {dup}", [1], source=str(path))
    width = len(header)
    rows = []
    bad = []
    for recno, rec in enumerate(records[1:], start=2):
        if rec == [] and width == 1:
            rec = [""]
        if len(rec) != width:
            bad.append(recno)
        rows.append(rec)
    if bad:
        shown = ", ".join(map(str, bad[:10])) + (" ..." if len(bad) > 10 else "")
        raise CsvFormatError(f"row arity mismatch (expected {width} cells) at row {shown}", bad,
                             source=str(path))
    return CsvTable(path, header, rows, dialect)


def _parse_cell(raw: str, t: BType):
    """Return (value, reason); reason is None on success."""
    if t == INT:
        s = raw.strip()
        if not _INT_RE.match(s):
            return None, "not-an-integer"
        v = int(s)
        if not INT_MIN <= v <= INT_MAX:
            return None, "overflow"
        return v, None
    if t == BOOL:
        s = raw.strip()
        if s == "TRUE":
            return True, None
        if s == "FALSE":
            return False, None
        return None, "not-a-boolean"
    return raw, None


def bind_column(decl: DataDecl, table: CsvTable) -> BSet:
    """Read ``decl``'s column as a sequence. Raises DataBindingError listing
    every bad cell."""
    try:
        col = table.header.index(decl.column)
    except ValueError:
        raise DataBindingError([DataIssue(decl.name, None, decl.column, "missing-column")]) from None
    out = []
    issues = []
    t = decl.elem_type
    for i, row in enumerate(table.rows, start=1):
        v, reason = _parse_cell(row[col], t)
        if reason:
            issues.append(DataIssue(decl.name, i, row[col], reason))
        else:
            out.append((i, v))
    if issues:
        raise DataBindingError(issues)
    return BSet(tuple(out))


def build_env(decls: list[DataDecl], data_dir, dialect: Dialect = Dialect()):
    """Load every declared item. Returns ``(env, issues)``; env is None when
    there are issues. Each source file is read once."""
    data_dir = Path(data_dir)
    seen = {}
    for d in decls:
        if d.name in seen:
            raise IngestError(f"duplicate declaration of {d.name}", kind="duplicate-declaration")
        seen[d.name] = d
    tables: dict[str, CsvTable | CsvFormatError] = {}
    values = {}
    issues: list[DataIssue] = []
    for d in decls:
        if d.source not in tables:
            path = data_dir / d.source
            try:
                tables[d.source] = read_csv(path, dialect)
            except FileNotFoundError:
                raise IngestError(f"data file {str(path)!r} for {d.name} not found") from None
            except OSError as e:
                raise IngestError(f"cannot read {str(path)!r} for {d.name}: {e}") from None
            except CsvFormatError as e:
                tables[d.source] = e
        table = tables[d.source]
        if isinstance(table, CsvFormatError):
            issues.extend(DataIssue(d.name, r - 1, "", "arity-mismatch") for r in table.rows)
            continue
        try:
            values[d.name] = bind_column(d, table)
        except DataBindingError as e:
            issues.extend(e.issues)
    if issues:
        return None, issues
    return Env(values, {d.name: d.btype for d in decls}), []


def parse_decl_file(text: str, source: str | None = None) -> list[DataDecl]:
    """Parse ``DATA F!C : seq(T) SOURCE "f.csv" COLUMN "header"`` blocks."""
    p = Parser(tokenize(text, source))
    decls = []
    try:
        while p.tok.kind != "eof":
            p.expect("DATA", "'DATA'")
            name_tok = p.tok
            if name_tok.kind != "qualified-identifier":
                p.error(f"expected File!Column name, found {name_tok.text!r}")
            p.advance()
            p.expect(":")
            p.expect("seq")
            p.expect("(")
            t = p.tok
            if not (t.kind == "keyword" and t.text in BASIC):
                p.error("expected INT, BOOL or STRING")
            p.advance()
            p.expect(")")
            p.expect("SOURCE")
            src = p.tok
            if src.kind != "string-literal":
                p.error("expected quoted source path")
            p.advance()
            p.expect("COLUMN")
            colt = p.tok
            if colt.kind != "string-literal":
                p.error("expected quoted column header")
            p.advance()
            stem = name_tok.text.split("!", 1)[0]
            if Path(src.text).stem != stem:
                raise ParseError(f"{name_tok.text}: file part {stem!r} does not match source "
                                 f"file {src.text!r}", name_tok.loc)
            decls.append(DataDecl(name_tok.text, BASIC[t.text], src.text, colt.text))
    except ParseError as e:
        e.source = source
        Exception.__init__(e, e.format())
        raise
    return decls
