"""Shared helpers for the test modules."""

from __future__ import annotations

from pathlib import Path

from bvalid.lang import parse_expr, parse_pred, typecheck


def typed_pred(text, types=None):
    return typecheck(parse_pred(text), types or {}, expect_pred=True)


def typed_expr(text, types=None):
    return typecheck(parse_expr(text), types or {}, expect_pred=False)


def write_project(root: Path, *, csvs: dict, decls: str, rules: str, extra: str = "") -> Path:
    """Create a minimal project under ``root`` and return the config path."""
    data = root / "data"
    data.mkdir(parents=True, exist_ok=True)
    for name, text in csvs.items():
        (data / name).write_text(text, encoding="utf-8")
    (root / "project.decl").write_text(decls, encoding="utf-8")
    (root / "checks.rules").write_text(rules, encoding="utf-8")
    cfg = root / "project.ini"
    cfg.write_text("data_dir = data\ndeclarations = project.decl\nrules = checks.rules\n"
                   "output = out\nformats = text, csv, json\n" + extra, encoding="utf-8")
    return cfg

