"""Project configuration and the load -> bind -> check -> report pipeline.

A project file is INI-style; the ``[project]`` header may be omitted::

    data_dir = data
    declarations = data.decl
    rules =
        rules/generic.rules
        rules/line1.rules
    formats = text, csv, json

List values are separated by commas or newlines. Paths are relative to the
project file's directory.
"""

from __future__ import annotations

import configparser
import hashlib
import logging
import time
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

from .errors import BError, ConfigError
from .ingest import Dialect, build_env, parse_decl_file
from .report import FORMATS, Report, emit, summarize
from .rules import DEFAULT_MAX_FINDINGS, RunConfig, expand_defs, load_rule_texts, run_all
from .values import DEFAULT_MAX_SET_SIZE

log = logging.getLogger(__name__)

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2

_KEYS = {"data_dir", "delimiter", "quotechar", "declarations", "rules", "output", "formats",
         "max_findings", "jobs", "max_set_size", "figures"}


@dataclass
class ProjectConfig:
    path: Path
    data_dir: Path
    declarations: list[Path]
    rules: list[Path]
    output: Path
    dialect: Dialect = field(default_factory=Dialect)
    formats: tuple[str, ...] = ("text", "csv")
    max_findings: int = DEFAULT_MAX_FINDINGS
    jobs: int = 1
    max_set_size: int = DEFAULT_MAX_SET_SIZE
    figures: bool = False

    def run_config(self) -> RunConfig:
        return RunConfig(self.max_findings, self.jobs, self.max_set_size)


def _split(value: str) -> list[str]:
    return [p.strip() for chunk in value.splitlines() for p in chunk.split(",") if p.strip()]


def _int(section, key, default) -> int:
    raw = section.get(key)
    if raw is None:
        return default
    try:
        v = int(raw)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {raw!r}", kind="parse-error") from None
    if v < 1:
        raise ConfigError(f"{key} must be positive, got {v}", kind="parse-error")
    return v


def load_project(path) -> ProjectConfig:
    path = Path(path)
    text = path.read_text(encoding="utf-8-sig")
    offset = 0
    if not text.lstrip().startswith("["):
        text = "[project]\n" + text
        offset = 1
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                   inline_comment_prefixes=None)
    try:
        cp.read_string(text, source=str(path))
    except configparser.ParsingError as e:
        lineno = e.errors[0][0] - offset if e.errors else 0
        raise ConfigError(f"cannot parse line {lineno}: {e.errors[0][1].strip() if e.errors else e}",
                          kind="parse-error", source=str(path)) from None
    except configparser.Error as e:
        lineno = getattr(e, "lineno", 0) - offset
        raise ConfigError(f"cannot parse line {lineno}: {e.message}", kind="parse-error",
                          source=str(path)) from None
    if not cp.has_section("project"):
        raise ConfigError("missing [project] section", kind="missing-mandatory-key", source=str(path))
    sec = cp["project"]
    unknown = sorted(set(sec) - _KEYS)
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown}", kind="parse-error", source=str(path))
    for key in ("declarations", "rules"):
        if key not in sec or not _split(sec[key]):
            raise ConfigError(f"missing mandatory key {key!r}", kind="missing-mandatory-key",
                              source=str(path))
    base = path.parent
    delimiter = sec.get("delimiter", ";")
    if delimiter == "\\t":
        delimiter = "\t"
    if len(delimiter) != 1:
        raise ConfigError(f"delimiter must be one character, got {delimiter!r}",
                          kind="parse-error", source=str(path))
    formats = tuple(_split(sec.get("formats", "text, csv")))
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise ConfigError(f"unknown report format(s) {bad}", kind="parse-error", source=str(path))
    try:
        figures = sec.getboolean("figures", fallback=False)
    except ValueError as e:
        raise ConfigError(str(e), kind="parse-error", source=str(path)) from None
    return ProjectConfig(
        path=path,
        data_dir=base / sec.get("data_dir", "."),
        declarations=[base / p for p in _split(sec["declarations"])],
        rules=[base / p for p in _split(sec["rules"])],
        output=base / sec.get("output", "out"),
        dialect=Dialect(delimiter, sec.get("quotechar", '"')),
        formats=formats,
        max_findings=_int(sec, "max_findings", DEFAULT_MAX_FINDINGS),
        jobs=_int(sec, "jobs", 1),
        max_set_size=_int(sec, "max_set_size", DEFAULT_MAX_SET_SIZE),
        figures=figures,
    )


def config_digest(config: ProjectConfig, decls=()) -> str:
    """sha256 over the project file, declaration files, rule files and the
    CSV files the declarations reference."""
    h = hashlib.sha256()
    files = [config.path] + list(config.declarations) + list(config.rules)
    files += sorted({config.data_dir / d.source for d in decls})
    for f in files:
        h.update(f.name.encode("utf-8") + b"\0")
        try:
            h.update(f.read_bytes())
        except OSError:
            h.update(b"<missing>")
        h.update(b"\0")
    return "sha256:" + h.hexdigest()


def exit_code(report: Report) -> int:
    s = report.summary
    if s.get("error") or s.get("data_issues") or s.get("load_errors"):
        return EXIT_ERROR
    if s.get("fail"):
        return EXIT_FAIL
    return EXIT_OK


def _finish(report: Report, config: ProjectConfig, decls, started: float) -> tuple[Report, int]:
    report.summary = summarize(report.results, report.data_issues, report.diagnostics)
    report.config_digest = config_digest(config, decls)
    report.elapsed = time.perf_counter() - started
    return report, exit_code(report)


def run_project(config: ProjectConfig) -> tuple[Report, int]:
    """Run the whole pipeline. Never raises for bad inputs: failures end up in
    ``report.diagnostics`` and exit code 2."""
    started = time.perf_counter()
    report = Report(started=datetime.now(timezone.utc).isoformat(timespec="seconds"))
    decls = []
    try:
        for p in config.declarations:
            decls += parse_decl_file(p.read_text(encoding="utf-8-sig"), str(p))
        rule_texts = [(str(p), p.read_text(encoding="utf-8-sig")) for p in config.rules]
        defs, rules = load_rule_texts(rule_texts)
        env, issues = build_env(decls, config.data_dir, config.dialect)
        if issues:
            report.data_issues = issues
            return _finish(report, config, decls, started)
        rules = expand_defs(defs, rules, data_names=set(env.globals))
    except (BError, OSError, UnicodeDecodeError) as e:
        report.diagnostics.append(str(e))
        return _finish(report, config, decls, started)
    log.info("loaded %d declarations, %d definitions, %d rules", len(decls), len(defs), len(rules))
    checked = run_all(rules, env, config.run_config())
    report.results = checked.results
    return _finish(report, config, decls, started)


def write_reports(report: Report, config: ProjectConfig) -> list[Path]:
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    ext = {"text": "txt", "csv": "csv", "json": "json"}
    written = []
    for fmt in config.formats:
        path = out / f"report.{ext[fmt]}"
        path.write_bytes(emit(report, fmt))
        written.append(path)
    if config.figures:
        from .plotting import render_figures
        written += render_figures(report, out / "figures")
    return written


def with_overrides(config: ProjectConfig, **kw) -> ProjectConfig:
    return replace(config, **{k: v for k, v in kw.items() if v is not None})
