"""Summary figures written next to the delimited reports."""

from __future__ import annotations

from pathlib import Path

VERDICT_COLORS = {"PASS": "#4c9a2a", "FAIL": "#d1495b", "ERROR": "#edae49"}


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def render_figures(report, out_dir, top: int = 30) -> list[Path]:
    """Write verdict counts, the rules with most counterexamples and the
    slowest rules as PNG files. Returns the written paths."""
    plt = _pyplot()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    fig, ax = plt.subplots(figsize=(5, 3.2))
    names = ["PASS", "FAIL", "ERROR"]
    counts = [report.summary.get(n.lower(), 0) for n in names]
    bars = ax.bar(names, counts, color=[VERDICT_COLORS[n] for n in names])
    ax.bar_label(bars)
    ax.set_ylabel("rules")
    ax.set_title("Verdicts")
    fig.tight_layout()
    path = out_dir / "verdicts.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    failing = sorted((r for r in report.results if r.findings),
                     key=lambda r: (-len(r.findings), r.rule_id))[:top]
    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.25 * len(failing) + 1)))
    if failing:
        ax.barh([r.rule_id for r in failing][::-1], [len(r.findings) for r in failing][::-1],
                color=[VERDICT_COLORS[r.verdict] for r in failing][::-1])
        ax.set_xlabel("counterexamples")
    else:
        ax.text(0.5, 0.5, "no counterexamples", ha="center", va="center", transform=ax.transAxes)
        ax.set_axis_off()
    ax.set_title(f"Counterexamples per rule (top {top})")
    fig.tight_layout()
    path = out_dir / "findings_per_rule.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    slow = sorted(report.results, key=lambda r: (-r.elapsed, r.rule_id))[:top]
    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.25 * len(slow) + 1)))
    if slow:
        ax.barh([r.rule_id for r in slow][::-1], [r.elapsed for r in slow][::-1], color="#00798c")
        ax.set_xlabel("seconds")
    ax.set_title(f"Slowest rules (top {top})")
    fig.tight_layout()
    path = out_dir / "rule_times.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written
