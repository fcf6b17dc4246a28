"""Campaign output: per-bug repro directories, delimited summaries, and
rendered figures.

Layout under the output directory:
    summary.tsv            campaign counters, one key/value per line
    findings.tsv           one row per emitted bug report
    verdicts.png           verdict histogram
    unique_plans.png       unique-plan growth over executed queries
    <bug-id>/repro.sql     reduced script, target dialect
    <bug-id>/repro.mapped.sql  reduced script, reference dialect
    <bug-id>/meta.json     kind, verdict, seed, rules, outcomes, timestamps
"""

from __future__ import annotations

import datetime
import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .render import render


def write_outputs(out_dir, cfg, summary) -> None:
    os.makedirs(out_dir, exist_ok=True)
    _write_summary_tsv(os.path.join(out_dir, "summary.tsv"), summary)
    _write_findings_tsv(os.path.join(out_dir, "findings.tsv"), summary)
    _write_figures(out_dir, summary)
    for report in summary.reports:
        write_report(out_dir, cfg, report)
    if cfg.mode == "record" and summary.reports:
        _write_case_bundle(os.path.join(out_dir, "cases.jsonl"), cfg, summary)


def _write_case_bundle(path, cfg, summary) -> None:
    """Findings as replayable case pairs; with the recorded fixtures this
    turns every live finding into an offline regression test."""
    target_dialect = cfg.target.resolved_dialect()
    reference_dialect = cfg.reference.resolved_dialect()
    with open(path, "w", encoding="utf-8") as fh:
        for r in summary.reports:
            rec = {
                "name": r.id,
                "target": [render(s, target_dialect) for s in r.reduced_target],
                "reference": [render(s, reference_dialect) for s in r.reduced_reference],
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _write_summary_tsv(path, summary) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("metric\tvalue\n")
        fh.write(f"mode\t{summary.mode}\n")
        fh.write(f"seed\t{summary.seed}\n")
        for key, value in summary.counts().items():
            fh.write(f"{key}\t{value}\n")
        if summary.aborted:
            fh.write(f"aborted\t{summary.aborted}\n")


def _write_findings_tsv(path, summary) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("id\tkind\tverdict\tcase\trules\tflaky\n")
        for r in summary.reports:
            rules = ",".join(r.applied_rules)
            fh.write(f"{r.id}\t{r.kind}\t{r.verdict.value}\t{r.case_name}\t{rules}\t{int(r.flaky)}\n")


def _write_figures(out_dir, summary) -> None:
    counts = summary.counts()
    labels = ["equal", "logic-discrepancies", "internal-errors",
              "expected-errors", "both-error-consistent"]
    values = [counts[k] for k in labels]

    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    ax.bar(range(len(labels)), values, color="#4477aa")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels([l.replace("-", "\n") for l in labels], fontsize=8)
    ax.set_ylabel("queries")
    ax.set_title(f"verdicts ({summary.mode}, seed {summary.seed})")
    for spine in ("top", "right"):
        ax.spines[spine].set_visible(False)
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "verdicts.png"), dpi=120)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    series = summary.plan_series or (0,)
    ax.step(range(1, len(series) + 1), series, where="post", color="#228833")
    ax.set_xlabel("queries executed")
    ax.set_ylabel("unique query plans")
    ax.set_title("unique-plan growth")
    for spine in ("top", "right"):
        ax.spines[spine].set_visible(False)
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "unique_plans.png"), dpi=120)
    plt.close(fig)


def _script_text(stmts, dialect) -> str:
    return ";\n".join(render(s, dialect) for s in stmts) + ";\n"


def _outcome_record(outcome) -> dict:
    if outcome is None:
        return {}
    if outcome.status == "rows":
        return {"status": "rows", "rows": [list(r) for r in outcome.rows],
                "column_types": list(outcome.column_types)}
    return {"status": "error", "error": outcome.error_text}


def write_report(out_dir, cfg, report) -> str:
    bug_dir = os.path.join(out_dir, report.id)
    os.makedirs(bug_dir, exist_ok=True)
    target_dialect = cfg.target.resolved_dialect()
    reference_dialect = cfg.reference.resolved_dialect()
    with open(os.path.join(bug_dir, "repro.sql"), "w", encoding="utf-8") as fh:
        fh.write(_script_text(report.reduced_target, target_dialect))
    with open(os.path.join(bug_dir, "repro.mapped.sql"), "w", encoding="utf-8") as fh:
        fh.write(_script_text(report.reduced_reference, reference_dialect))
    meta = {
        "id": report.id,
        "kind": report.kind,
        "verdict": report.verdict.value,
        "case": report.case_name,
        "seed": report.seed,
        "applied_rules": list(report.applied_rules),
        "target_outcome": _outcome_record(report.target_outcome),
        "reference_outcome": _outcome_record(report.reference_outcome),
        "flaky": report.flaky,
        "config": report.config_snapshot,
        "reduction_trace": [list(t) for t in report.trace],
        "written_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "dedup_note": "automatic digest/error-class heuristic; manual tracker search not replicated",
    }
    with open(os.path.join(bug_dir, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return bug_dir
