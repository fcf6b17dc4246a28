"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line
with its runtime. Tolerances and budgets are pinned here, not configurable.

The published headline totals (57 live bugs, the 24-hour unique-plan
improvement) depend on proprietary systems and long wall-clock runs and are
documented rather than asserted; acceptance is property-based plus golden
fixtures, with the live smoke check gated behind environment variables.
"""

import itertools
import json
import os
import sys
import time

import pytest

from conftest import asset_path, data_path
from support import alignment_cases, check_alignment
import sqlxd.report  # noqa: F401  -- warm matplotlib outside the timed criteria
from sqlxd.campaign import CampaignConfig, plan_fingerprint, run_campaign
from sqlxd.executor import EndpointConfig
from sqlxd.generator import GenConfig, QueryGenerator, SplitMix64, gen_data, gen_schema
from sqlxd.mapping import MappingEngine
from sqlxd.oracle import Verdict
from sqlxd.parse import parse
from sqlxd.reducer import ddmin
from sqlxd.registry import clause_ids, pool_from_ids
from sqlxd.render import render
from sqlxd.sqlast import POSTGRESQL, QUESTDB


def announce(criterion: str, ok: bool, elapsed: float, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    line = f"ACCEPTANCE {status} [{criterion}] {elapsed:.2f}s"
    if detail:
        line += f" - {detail}"
    print(line, file=sys.__stdout__, flush=True)
    assert ok, line


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_criterion_1_golden_mapping_suite():
    """Table rows 01-10 plus the NULL-guard and timestamp-range examples map
    to the stored golden forms exactly, in under a second."""
    with open(asset_path("golden_mappings.jsonl"), "r", encoding="utf-8") as fh:
        cases = [json.loads(line) for line in fh if line.strip()]
    assert len(cases) == 12
    failures = []
    with Timer() as t:
        for case in cases:
            engine = MappingEngine(schema=[parse(d) for d in case["schema"]])
            mq = engine.apply(parse(case["input"]))
            rendered = render(mq.mapped, POSTGRESQL)
            if rendered != case["golden"]:
                failures.append(f"{case['id']}: {rendered!r}")
    ok = not failures and t.elapsed < 1.0
    announce("1 golden-mapping-suite", ok, t.elapsed,
             f"{len(cases)} goldens" + ("; " + "; ".join(failures) if failures else ""))


def test_criterion_2_null_model_brute_force():
    """Exhaustive alignment over the null-guard/symmetric-range subset:
    bindings and bounds from {NULL,-1,0,1}, IN lists up to 3 elements,
    boolean nestings to depth 2; 100% equality in under 10 seconds."""
    with Timer() as t:
        cases = alignment_cases()
        checked = 0
        mismatches = 0
        for expr, columns in cases:
            try:
                checked += check_alignment(expr, columns)
            except AssertionError:
                mismatches += 1
    ok = mismatches == 0 and checked >= 5000 and t.elapsed < 10.0
    announce("2 null-model-brute-force", ok, t.elapsed,
             f"{checked} cases, {mismatches} mismatches")


def _replay_config(out_dir) -> CampaignConfig:
    return CampaignConfig(
        target=EndpointConfig(kind="fixture", endpoint_id="questdb", dialect="questdb"),
        reference=EndpointConfig(kind="fixture", endpoint_id="postgresql", dialect="postgresql"),
        mode="replay",
        cases_path=data_path("fixtures", "listings_cases.jsonl"),
        fixtures_path=data_path("fixtures", "listings_fixtures.jsonl"),
        out_dir=str(out_dir),
    )


def test_criterion_3_oracle_fixtures(tmp_path):
    """The bundled regression fixtures replay to exactly the published
    verdicts: two scalar logic discrepancies ([(True)] vs [(Null)] and
    [(1)] vs [(0)]), one set-operation discrepancy ([(1),(1)] vs [(1)]),
    and three internal errors, deterministically, in under a second."""
    with Timer() as t:
        summary = run_campaign(_replay_config(tmp_path / "out"))
    by_name = {r.case_name: r for r in summary.reports}

    def rows(outcome):
        return [list(r) for r in outcome.rows] if outcome.status == "rows" else outcome.error_text

    checks = [
        summary.queries == 6,
        summary.logic_discrepancies == 3,
        summary.internal_errors == 3,
        rows(by_name["null-in-projection"].target_outcome) == [[True]],
        rows(by_name["null-in-projection"].reference_outcome) == [[None]],
        rows(by_name["string-compare-count-distinct"].target_outcome) == [[1]],
        rows(by_name["string-compare-count-distinct"].reference_outcome) == [[0]],
        rows(by_name["setop-duplicate-rows"].target_outcome) == [[1], [1]],
        rows(by_name["setop-duplicate-rows"].reference_outcome) == [[1]],
        "Invalid Column" in by_name["union-invalid-column-abort"].target_outcome.error_text,
        "core dumped" in by_name["join-null-filter-crash"].target_outcome.error_text,
        "Index 2 out of bounds" in by_name["distinct-count-join-out-of-bounds"].target_outcome.error_text,
    ]
    ok = all(checks) and t.elapsed < 1.0
    announce("3 oracle-fixtures", ok, t.elapsed,
             f"verdicts {summary.logic_discrepancies} logic / {summary.internal_errors} internal")


FULL_POOL = pool_from_ids([
    "select", "where", "group_by", "order_by", "limit", "distinct", "cross_join",
    "inner_join", "subquery", "scalar_subquery", "union", "union_all", "except",
    "intersect", "in_list", "between", "is_null", "case_when", "count", "avg",
    "min", "max", "window_function", "sample_by", "latest_on", "timestamp_in",
    "count_distinct", "symbol_type",
])


def _corpus_bytes(seed: int, count: int):
    cfg = GenConfig(seed=seed)
    schema = gen_schema(cfg, QUESTDB)
    gen = QueryGenerator(schema, FULL_POOL, cfg, QUESTDB)
    statements = [gen.query() for _ in range(count)]
    text = "\n".join(render(s, QUESTDB) for s in statements)
    return schema, statements, text.encode("utf-8")


def test_criterion_4_generator_validity_and_determinism():
    """10,000 queries at a fixed seed round-trip with zero failures, the
    corpus is byte-identical across runs, and the clause histogram covers
    every enabled pool clause, all in under 60 seconds."""
    count = 10_000
    with Timer() as t:
        schema, statements, corpus = _corpus_bytes(seed=1, count=count)
        failures = 0
        histogram = {}
        for stmt in statements:
            if parse(render(stmt, QUESTDB), QUESTDB) != stmt:
                failures += 1
            for cid in clause_ids(stmt):
                histogram[cid] = histogram.get(cid, 0) + 1
        for table in schema.tables:
            for cid in clause_ids(table):
                histogram[cid] = histogram.get(cid, 0) + 1
        _, _, corpus_again = _corpus_bytes(seed=1, count=count)
    uncovered = set(FULL_POOL.effective()) - set(histogram)
    ok = (failures == 0 and corpus == corpus_again and not uncovered
          and t.elapsed < 60.0)
    announce("4 generator-validity-determinism", ok, t.elapsed,
             f"{count} queries, {failures} round-trip failures, uncovered={sorted(uncovered)}")


def test_criterion_5_reducer_minimality():
    """100 random monotone subset predicates over up to 12 units: ddmin output
    satisfies the predicate, is 1-minimal under single-unit removal, and
    matches the unique brute-force minimum, in under 30 seconds."""
    rng = SplitMix64(20_240_817)
    bad = 0
    with Timer() as t:
        for _ in range(100):
            n = rng.randint(1, 12)
            required = frozenset(
                i for i in range(n) if rng.chance(0.3)
            )
            pred = lambda units, req=required: req <= set(units)
            out = ddmin(list(range(n)), pred)
            if not pred(out.units):
                bad += 1
                continue
            if any(pred(out.units[:i] + out.units[i + 1:]) for i in range(len(out.units))):
                bad += 1
                continue
            if set(out.units) != set(required):  # unique minimum for subset predicates
                bad += 1
    ok = bad == 0 and t.elapsed < 30.0
    announce("5 reducer-minimality", ok, t.elapsed, f"100 predicates, {bad} violations")


def test_criterion_6_plan_fingerprint_collapse():
    """The 50-text plan corpus collapses to the golden distinct count and
    fingerprinting is idempotent, in under a second."""
    with open(asset_path("plan_corpus.json"), "r", encoding="utf-8") as fh:
        corpus = json.load(fh)
    with Timer() as t:
        fingerprints = [plan_fingerprint(p["text"]) for p in corpus["plans"]]
        distinct = len(set(fingerprints))
        idempotent = all(plan_fingerprint(fp.text) == fp for fp in fingerprints)
    ok = (len(corpus["plans"]) == 50 and distinct == corpus["expected_distinct"]
          and idempotent and t.elapsed < 1.0)
    announce("6 plan-fingerprint-collapse", ok, t.elapsed,
             f"50 plans -> {distinct} fingerprints (golden {corpus['expected_distinct']})")


def test_criterion_7_pipeline_reproducibility(tmp_path):
    """Two replay campaigns with identical config produce identical
    summaries and identical report digests, including repro file bytes."""
    with Timer() as t:
        a = run_campaign(_replay_config(tmp_path / "a"))
        b = run_campaign(_replay_config(tmp_path / "b"))
        same_counts = a.counts() == b.counts()
        same_digests = a.report_digests() == b.report_digests()
        same_bytes = all(
            (tmp_path / "a" / rid / "repro.sql").read_bytes()
            == (tmp_path / "b" / rid / "repro.sql").read_bytes()
            and (tmp_path / "a" / rid / "repro.mapped.sql").read_bytes()
            == (tmp_path / "b" / rid / "repro.mapped.sql").read_bytes()
            for rid in a.report_digests()
        )
    ok = same_counts and same_digests and same_bytes
    announce("7 pipeline-reproducibility", ok, t.elapsed,
             f"counts={same_counts} digests={same_digests} bytes={same_bytes}")


def _live_endpoint(env_var: str, default_user: str) -> EndpointConfig:
    parts = os.environ[env_var].split(":")
    kind = parts[0]
    host = parts[1] if len(parts) > 1 else "localhost"
    port = int(parts[2]) if len(parts) > 2 else (8812 if kind == "questdb" else 5432)
    user = parts[3] if len(parts) > 3 and parts[3] else default_user
    default_db = "qdb" if kind == "questdb" else "postgres"
    database = parts[4] if len(parts) > 4 and parts[4] else default_db
    return EndpointConfig(
        kind=kind, endpoint_id=kind, host=host, port=port, user=user,
        database=database, password_env=env_var.replace("LIVE_", "") + "_PASSWORD",
    )


def test_criterion_8_live_smoke(tmp_path):
    """Environment-gated, non-blocking: with live endpoints configured via
    SQLXD_LIVE_TARGET / SQLXD_LIVE_REFERENCE ("kind:host:port:user:db"), a
    1,000-query campaign completes without operational failure and every
    report re-triggers its verdict on replay against the live systems."""
    if "SQLXD_LIVE_TARGET" not in os.environ or "SQLXD_LIVE_REFERENCE" not in os.environ:
        print("ACCEPTANCE SKIP [8 live-smoke] live endpoints not configured "
              "(set SQLXD_LIVE_TARGET / SQLXD_LIVE_REFERENCE)", file=sys.__stdout__, flush=True)
        pytest.skip("live endpoints not configured; criterion 8 is non-blocking")
    from sqlxd.executor import make_executor
    from sqlxd.oracle import compare
    from sqlxd.campaign import _ordered

    cfg = CampaignConfig(
        target=_live_endpoint("SQLXD_LIVE_TARGET", "admin"),
        reference=_live_endpoint("SQLXD_LIVE_REFERENCE", "postgres"),
        mode="live",
        queries=1000,
        registry_path=data_path("questdb_registry.jsonl"),
        out_dir=str(tmp_path / "live"),
        gen=GenConfig(seed=1, table_prefix="sxd_acc_"),
    )
    with Timer() as t:
        summary = run_campaign(cfg)
        ok = summary.queries == 1000
        target = make_executor(cfg.target)
        reference = make_executor(cfg.reference)
        try:
            for report in summary.reports:
                t_out = r_out = None
                for stmt in report.reduced_target:
                    t_out = target.execute_text(render(stmt, target.dialect))
                for stmt in report.reduced_reference:
                    r_out = reference.execute_text(render(stmt, reference.dialect))
                verdict = compare(t_out, r_out, _ordered(report.reduced_target[-1]), cfg.classifier)
                ok = ok and verdict is report.verdict
        finally:
            target.close()
            reference.close()
    announce("8 live-smoke", ok, t.elapsed,
             f"{summary.queries} queries, {len(summary.reports)} reports re-verified")
