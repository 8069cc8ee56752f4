"""Verification report model and its text, CSV and JSON renderings.

The CSV and JSON forms are byte-identical for identical inputs; run times and
the start timestamp only appear in the text form.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from . import __version__

FORMATS = ("text", "csv", "json")
MAX_PARAMS = 9


@dataclass
class Report:
    results: list = field(default_factory=list)        # RuleResult, declaration order
    data_issues: list = field(default_factory=list)    # DataIssue
    summary: dict = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)
    tool_version: str = __version__
    config_digest: str = ""
    started: str = ""
    elapsed: float = 0.0


def summarize(results, data_issues, diagnostics=()) -> dict:
    verdicts = [r.verdict for r in results]
    return {
        "rules": len(results),
        "pass": verdicts.count("PASS"),
        "fail": verdicts.count("FAIL"),
        "error": verdicts.count("ERROR"),
        "findings": sum(len(r.findings) for r in results),
        "truncated": sum(1 for r in results if r.truncated),
        "data_issues": len(data_issues),
        "load_errors": len(diagnostics),
    }


def _summary_line(s: dict) -> str:
    return (f"{s.get('rules', 0)} rules: {s.get('pass', 0)} PASS, {s.get('fail', 0)} FAIL, "
            f"{s.get('error', 0)} ERROR; {s.get('findings', 0)} findings; "
            f"{s.get('data_issues', 0)} data issues; {s.get('load_errors', 0)} load errors")


def _one_line(text: str) -> str:
    return " ".join(str(text).splitlines())


def _error_dict(e) -> dict:
    loc = getattr(e, "loc", None)
    return {
        "kind": e.kind,
        "message": e.message,
        "source": (loc.file if loc is not None and loc.file else None) or e.source,
        "line": loc.line if loc else None,
        "column": loc.column if loc else None,
        "witness": getattr(e, "witness", None),
    }


def to_dict(report: Report) -> dict:
    return {
        "tool_version": report.tool_version,
        "config_digest": report.config_digest,
        "summary": report.summary,
        "diagnostics": report.diagnostics,
        "data_issues": [
            {"decl": i.decl, "row": i.row, "cell": i.cell, "reason": i.reason}
            for i in report.data_issues
        ],
        "results": [
            {
                "rule_id": r.rule_id,
                "verdict": r.verdict,
                "truncated": r.truncated,
                "error": _error_dict(r.error) if r.error is not None else None,
                "findings": [
                    {"block": f.block, "message": f.message, "witness": f.witness}
                    for f in r.findings
                ],
            }
            for r in report.results
        ],
    }


def _emit_text(report: Report) -> str:
    out = [
        "Data verification report",
        f"tool version : {report.tool_version}",
        f"config digest: {report.config_digest}",
        f"started      : {report.started}",
        f"elapsed      : {report.elapsed:.2f} s",
        "",
        "Summary: " + _summary_line(report.summary),
    ]
    if report.diagnostics:
        out += ["", "Load errors:"] + [f"  {_one_line(d)}" for d in report.diagnostics]
    if report.data_issues:
        out += ["", "Data issues:"] + [f"  {_one_line(i)}" for i in report.data_issues]
    for r in report.results:
        head = f"== {r.rule_id}: {r.verdict}"
        if r.findings:
            head += f" ({len(r.findings)} counterexample{'s' if len(r.findings) != 1 else ''}"
            head += ", truncated)" if r.truncated else ")"
        out += ["", head + f"  [{r.elapsed:.3f} s]"]
        for f in r.findings:
            out.append(f"  [{f.block}] {f.message}")
        if r.error is not None:
            out.append(f"  error: {_one_line(r.error)}")
    return "\n".join(out) + "\n"


def _emit_csv(report: Report) -> str:
    buf = io.StringIO()
    buf.write(f"# tool_version={report.tool_version}\n")
    buf.write(f"# config_digest={report.config_digest}\n")
    buf.write("# summary " + " ".join(f"{k}={v}" for k, v in report.summary.items()) + "\n")
    for d in report.diagnostics:
        buf.write(f"# load error: {_one_line(d)}\n")
    for i in report.data_issues:
        buf.write(f"# data issue: {_one_line(i)}\n")
    for r in report.results:
        if r.error is not None:
            buf.write(f"# ERROR {r.rule_id}: {_one_line(r.error)}\n")
        if r.truncated:
            buf.write(f"# TRUNCATED {r.rule_id}\n")
    w = csv.writer(buf, delimiter=";", lineterminator="\n")
    w.writerow(["rule_id", "block", "message"] + [f"param_{k}" for k in range(1, MAX_PARAMS + 1)])
    for r in report.results:
        for f in r.findings:
            params = list(f.witness.values())[:MAX_PARAMS]
            w.writerow([r.rule_id, f.block, f.message] + params + [""] * (MAX_PARAMS - len(params)))
    return buf.getvalue()


def _emit_json(report: Report) -> str:
    return json.dumps(to_dict(report), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def emit(report: Report, fmt: str) -> bytes:
    if fmt == "text":
        text = _emit_text(report)
    elif fmt == "csv":
        text = _emit_csv(report)
    elif fmt == "json":
        text = _emit_json(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return text.encode("utf-8")
