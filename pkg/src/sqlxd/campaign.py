"""Campaign orchestration: run the probe/map/generate/compare loop end to
end, track unique query plans, deduplicate findings, and emit reproducible
bug reports.

Modes: live generates workload against two live endpoints; record is live
plus fixture capture, so any live finding becomes an offline regression
case; replay re-executes recorded or bundled case pairs against the
fixture store and is bit-reproducible.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from dataclasses import dataclass, field, replace

from .errors import CampaignError, ConnectionLost, FlakyPredicate, UnmappableConstruct
from .executor import EndpointConfig, FIXTURE_MISS, FixtureStore, make_executor
from .generator import GenConfig, QueryGenerator, gen_data, gen_schema
from .mapping import DEFAULT_RULES, MappingEngine, map_ddl
from .oracle import ErrorClassifier, Verdict, compare
from .parse import parse_script
from .reducer import ReducedCase, ReproCase, reduce_case
from .registry import build_pool, load_registry, probe_all
from .render import render
from .sqlast import Select


# ---------------------------------------------------------------------------
# Query plan fingerprinting
# ---------------------------------------------------------------------------

_ESTIMATE_RE = re.compile(r"\s*\((?:cost|rows|width|actual)[^)]*\)")
_NUMBER_RE = re.compile(r"\b\d+(?:\.\d+)?\b")
_QUOTED_RE = re.compile(r"'(?:[^']|'')*'")
_NORMALIZED_RE = re.compile(r"^\d+:")


@dataclass(frozen=True)
class PlanFingerprint:
    """Operator sequence with structural nesting; estimates and literal
    values stripped, so plans differing only in those collapse."""

    text: str


def plan_fingerprint(plan_text: str) -> PlanFingerprint:
    if not plan_text or not plan_text.strip():
        raise ValueError("empty plan text")
    lines = plan_text.splitlines()
    if all(_NORMALIZED_RE.match(l) for l in lines if l.strip()):
        return PlanFingerprint(plan_text.strip())  # already normalized
    nodes = []
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        is_node = i == 0 or "->" in line
        if not is_node:
            continue
        indent = len(line) - len(line.lstrip())
        body = line.strip()
        if body.startswith("->"):
            body = body[2:].strip()
        if not body or not body[0].isalpha():
            continue  # not an operator line; plan formats vary
        body = _ESTIMATE_RE.sub("", body)
        body = _QUOTED_RE.sub("?", body)
        body = _NUMBER_RE.sub("?", body).strip()
        if body:
            nodes.append(f"{indent}:{body}")
    if not nodes:
        # degraded mode: whitespace-normalized raw text
        return PlanFingerprint(re.sub(r"\s+", " ", plan_text.strip()))
    return PlanFingerprint("\n".join(nodes))


class PlanCounter:
    def __init__(self):
        self.seen = set()
        self.series = []

    def observe(self, plan_text) -> None:
        self.add(plan_text)
        self.series.append(len(self.seen))

    def add(self, plan_text) -> None:
        if plan_text:
            try:
                self.seen.add(plan_fingerprint(plan_text))
            except ValueError:
                pass

    def count(self) -> int:
        return len(self.seen)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

MODES = ("live", "replay", "record")


@dataclass
class CampaignConfig:
    target: EndpointConfig
    reference: EndpointConfig
    seed: int = 1
    queries: int = None
    duration: float = None
    gen: GenConfig = field(default_factory=GenConfig)
    registry_path: str = ""
    cases_path: str = ""
    fixtures_path: str = ""
    classifier: ErrorClassifier = field(default_factory=ErrorClassifier)
    out_dir: str = "out"
    mode: str = "replay"
    workers: int = 1
    refresh_interval: int = 100
    reduction_budget: int = 400

    def __post_init__(self):
        if self.mode not in MODES:
            raise CampaignError(f"unknown mode {self.mode!r}")
        if self.mode == "replay":
            if not self.cases_path:
                raise CampaignError("replay mode requires a cases path")
        elif (self.queries is None) == (self.duration is None):
            raise CampaignError("exactly one of queries / duration must be set")


def parse_config(path) -> CampaignConfig:
    """Flat key = value config text; dotted keys group endpoint and
    generator settings, gen.toggle.<clause> switches features."""
    raw = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise CampaignError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            raw[key.strip()] = value.strip()
    return config_from_dict(raw)


def _endpoint_from(raw: dict, prefix: str, default_id: str) -> EndpointConfig:
    get = lambda k, d=None: raw.get(f"{prefix}.{k}", d)
    kind = get("kind")
    if kind is None:
        raise CampaignError(f"missing {prefix}.kind")
    return EndpointConfig(
        kind=kind,
        endpoint_id=get("endpoint_id", default_id),
        host=get("host", "localhost"),
        port=int(get("port", 5432)),
        user=get("user", "postgres"),
        database=get("database", "postgres"),
        dialect=get("dialect", ""),
        fixtures=get("fixtures", raw.get("fixtures", "")),
        timeout=float(get("timeout", 30.0)),
        password_env=get("password_env", ""),
        explain=str(get("explain", "off")).lower() in ("1", "on", "true", "yes"),
    )


def config_from_dict(raw: dict) -> CampaignConfig:
    toggles = tuple(
        sorted(
            (key.split(".", 2)[2], value.lower() in ("1", "on", "true", "yes"))
            for key, value in raw.items()
            if key.startswith("gen.toggle.")
        )
    )
    gen = GenConfig(
        seed=int(raw.get("seed", 1)),
        table_count=int(raw.get("gen.table_count", 3)),
        max_columns=int(raw.get("gen.max_columns", 8)),
        row_range=(int(raw.get("gen.rows_min", 50)), int(raw.get("gen.rows_max", 500))),
        null_probability=float(raw.get("gen.null_probability", 0.05)),
        feature_toggles=toggles,
        max_subquery_depth=int(raw.get("gen.max_subquery_depth", 2)),
        max_setop_branches=int(raw.get("gen.max_setop_branches", 3)),
        table_prefix=raw.get("gen.table_prefix", ""),
    )
    classifier = ErrorClassifier().with_extensions(
        internal=tuple(p for p in raw.get("classifier.internal", "").split(",") if p),
        expected=tuple(p for p in raw.get("classifier.expected", "").split(",") if p),
    )
    return CampaignConfig(
        target=_endpoint_from(raw, "target", "target"),
        reference=_endpoint_from(raw, "reference", "reference"),
        seed=int(raw.get("seed", 1)),
        queries=int(raw["queries"]) if "queries" in raw else None,
        duration=float(raw["duration"]) if "duration" in raw else None,
        gen=gen,
        registry_path=raw.get("registry", ""),
        cases_path=raw.get("cases", ""),
        fixtures_path=raw.get("fixtures", ""),
        classifier=classifier,
        out_dir=raw.get("out", "out"),
        mode=raw.get("mode", "replay"),
        workers=int(raw.get("workers", 1)),
        refresh_interval=int(raw.get("refresh_interval", 100)),
        reduction_budget=int(raw.get("reduction_budget", 400)),
    )


# ---------------------------------------------------------------------------
# Cases and reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CampaignCase:
    """A paired script: statements the target runs and statements the
    reference runs, final statement being the compared query."""

    name: str
    target_stmts: tuple
    reference_stmts: tuple

    def query(self):
        return self.target_stmts[-1]


def load_cases(path) -> list:
    cases = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rec = json.loads(line)
            target = tuple(s for sql in rec["target"] for s in parse_script(sql))
            reference = tuple(s for sql in rec["reference"] for s in parse_script(sql))
            if len(target) != len(reference):
                raise CampaignError(f"case {rec['name']!r}: script sides differ in length")
            cases.append(CampaignCase(rec["name"], target, reference))
    return cases


@dataclass(frozen=True)
class BugReport:
    id: str
    kind: str  # "logic-bug" | "internal-error"
    verdict: Verdict
    case_name: str
    reduced_target: tuple  # statements
    reduced_reference: tuple
    original_target: tuple
    applied_rules: tuple
    target_outcome: object
    reference_outcome: object
    seed: int
    config_snapshot: dict
    flaky: bool = False
    trace: tuple = ()


def report_id(reduced_target, dialect) -> str:
    """Stable content digest over the canonical reduced script."""
    script = ";".join(render(s, dialect) for s in reduced_target)
    return hashlib.sha256(script.encode("utf-8")).hexdigest()[:12]


class ReportIndex:
    """Dedup index: reduced-script digest, or error class plus failing
    plan fingerprint for internal errors."""

    def __init__(self, classifier: ErrorClassifier):
        self.classifier = classifier
        self.by_digest = {}
        self.by_error_key = {}

    def check(self, report: BugReport):
        if report.id in self.by_digest:
            return ("duplicate-of", self.by_digest[report.id])
        if report.kind == "internal-error":
            key = self._error_key(report)
            if key is not None and key in self.by_error_key:
                return ("duplicate-of", self.by_error_key[key])
        return ("new", report.id)

    def add(self, report: BugReport):
        self.by_digest[report.id] = report.id
        if report.kind == "internal-error":
            key = self._error_key(report)
            if key is not None:
                self.by_error_key.setdefault(key, report.id)

    def _error_key(self, report: BugReport):
        outcome = report.target_outcome
        if outcome.status != "error":
            return None
        pattern = self.classifier.matched_internal_pattern(outcome.error_text)
        plan = report.reference_outcome.plan_text if report.reference_outcome else None
        if pattern is None or plan is None:
            return None
        return (pattern, plan_fingerprint(plan).text)


def dedupe(report: BugReport, seen: ReportIndex):
    return seen.check(report)


VERDICT_KIND = {
    Verdict.LOGIC_DISCREPANCY: "logic-bug",
    Verdict.INTERNAL_ERROR: "internal-error",
}


@dataclass
class CampaignSummary:
    mode: str
    seed: int
    queries: int = 0
    equal: int = 0
    logic_discrepancies: int = 0
    internal_errors: int = 0
    expected_errors: int = 0
    both_error_consistent: int = 0
    unique_plans: int = 0
    dedup_suppressed: int = 0
    skipped_unmappable: int = 0
    reports: tuple = ()
    plan_series: tuple = ()
    review_queue: tuple = ()
    aborted: str = ""  # non-empty reason means a partial summary

    def counts(self) -> dict:
        return {
            "queries": self.queries,
            "equal": self.equal,
            "logic-discrepancies": self.logic_discrepancies,
            "internal-errors": self.internal_errors,
            "expected-errors": self.expected_errors,
            "both-error-consistent": self.both_error_consistent,
            "unique-plans": self.unique_plans,
            "dedup-suppressed": self.dedup_suppressed,
            "skipped-unmappable": self.skipped_unmappable,
        }

    def report_digests(self) -> tuple:
        return tuple(sorted(r.id for r in self.reports))


# ---------------------------------------------------------------------------
# Campaign driver
# ---------------------------------------------------------------------------


class _Collector:
    """Serializes dedupe, plan counting, and report collection across
    workers; workers share nothing else."""

    def __init__(self, cfg: CampaignConfig):
        self.cfg = cfg
        self.lock = threading.Lock()
        self.summary = CampaignSummary(cfg.mode, cfg.seed)
        self.index = ReportIndex(cfg.classifier)
        self.plans = PlanCounter()
        self._reports = []

    def record_verdict(self, verdict: Verdict, plan_text):
        with self.lock:
            s = self.summary
            s.queries += 1
            if verdict is Verdict.EQUAL:
                s.equal += 1
            elif verdict is Verdict.LOGIC_DISCREPANCY:
                s.logic_discrepancies += 1
            elif verdict is Verdict.INTERNAL_ERROR:
                s.internal_errors += 1
            elif verdict is Verdict.EXPECTED_ERROR:
                s.expected_errors += 1
            else:
                s.both_error_consistent += 1
            self.plans.observe(plan_text)

    def offer(self, report: BugReport) -> bool:
        with self.lock:
            status = self.index.check(report)
            if status[0] == "duplicate-of":
                self.summary.dedup_suppressed += 1
                return False
            self.index.add(report)
            self._reports.append(report)
            return True

    def add_review(self, item: str):
        with self.lock:
            self.summary.review_queue += (item,)

    def skipped(self):
        with self.lock:
            self.summary.skipped_unmappable += 1

    def abort(self, reason: str):
        with self.lock:
            if not self.summary.aborted:
                self.summary.aborted = reason

    def finish(self) -> CampaignSummary:
        self.summary.unique_plans = self.plans.count()
        self.summary.reports = tuple(self._reports)
        self.summary.plan_series = tuple(self.plans.series)
        return self.summary


def run_campaign(cfg: CampaignConfig) -> CampaignSummary:
    collector = _Collector(cfg)
    if cfg.mode == "replay":
        _run_replay(cfg, collector)
    else:
        _run_live(cfg, collector)
    summary = collector.finish()
    from .report import write_outputs

    write_outputs(cfg.out_dir, cfg, summary)
    return summary


# -- replay -----------------------------------------------------------------


def _replay_executors(cfg: CampaignConfig):
    store = None
    if cfg.fixtures_path:
        store = FixtureStore.load(*str(cfg.fixtures_path).split(os.pathsep))
    target = make_executor(cfg.target, store)
    reference = make_executor(cfg.reference, store)
    return target, reference


def _run_replay(cfg: CampaignConfig, collector: _Collector):
    cases = load_cases(cfg.cases_path)
    target, reference = _replay_executors(cfg)
    for case in cases:
        try:
            _run_case(cfg, collector, case, target, reference)
        except CampaignError as exc:
            # missing fixtures violate the replay precondition: abort with a
            # partial summary rather than fabricating verdicts
            collector.abort(str(exc))
            return


def _exec_script(stmts, executor):
    outcome = None
    for stmt in stmts:
        outcome = executor.execute_text(render(stmt, executor.dialect))
        if outcome.status == "error" and outcome.error_text.startswith(FIXTURE_MISS):
            raise CampaignError(
                f"fixture missing for {executor.endpoint_id}: {render(stmt, executor.dialect)!r}"
            )
    return outcome


def _ordered(query) -> bool:
    return isinstance(query, Select) and bool(query.order_by)


def _run_case(cfg, collector, case: CampaignCase, target, reference):
    t_out = _exec_script(case.target_stmts, target)
    r_out = _exec_script(case.reference_stmts, reference)
    verdict = compare(t_out, r_out, _ordered(case.query()), cfg.classifier)
    plan = reference.explain_text(render(case.reference_stmts[-1], reference.dialect))
    if plan is None:
        plan = r_out.plan_text
    collector.record_verdict(verdict, plan)
    if verdict is Verdict.EXPECTED_ERROR:
        collector.add_review(f"{case.name}: reference refused; review the mapping rules")
        return
    if verdict not in VERDICT_KIND:
        return
    # Per-statement fixture records cannot answer counterfactual data states,
    # so replay files cases unreduced; live and record modes reduce for real.
    report = BugReport(
        id=report_id(case.target_stmts, target.dialect),
        kind=VERDICT_KIND[verdict],
        verdict=verdict,
        case_name=case.name,
        reduced_target=case.target_stmts,
        reduced_reference=case.reference_stmts,
        original_target=case.target_stmts,
        applied_rules=(),
        target_outcome=t_out,
        reference_outcome=_with_plan(r_out, plan),
        seed=cfg.seed,
        config_snapshot={"mode": cfg.mode, "case": case.name},
    )
    # self-check: the reduced pair must re-trigger the verdict before we file it
    rt = _exec_script(report.reduced_target, target)
    rr = _exec_script(report.reduced_reference, reference)
    if compare(rt, rr, _ordered(report.reduced_target[-1]), cfg.classifier) is not verdict:
        report = replace(report, flaky=True)
    collector.offer(report)


def _with_plan(outcome, plan):
    if plan and outcome.plan_text is None and outcome.status == "rows":
        from .executor import ExecOutcome

        return ExecOutcome("rows", outcome.rows, outcome.column_types,
                           latency=outcome.latency, plan_text=plan)
    return outcome


def _reduce_replay_case(cfg, case: CampaignCase, target, reference, want: Verdict):
    """Parallel unit reduction of a paired script: statement i on one side
    corresponds to statement i on the other. Candidates missing from the
    fixture store simply fail the predicate. Only meaningful against live
    endpoints or a store recorded for the candidates, so the campaign loop
    does not call it; the reduce subcommand does, on explicit request."""

    def pred(candidate: CampaignCase) -> bool:
        try:
            t = _exec_script(candidate.target_stmts, target)
            r = _exec_script(candidate.reference_stmts, reference)
        except CampaignError:
            return False
        return compare(t, r, _ordered(candidate.query()), cfg.classifier) is want

    from .reducer import ddmin, referenced_tables
    from .sqlast import CreateTable

    body_indices = list(range(len(case.target_stmts) - 1))
    flaky = False
    trace = ()
    reduced = case
    if body_indices:
        def build(kept):
            idx = sorted(kept)
            return CampaignCase(
                case.name,
                tuple(case.target_stmts[i] for i in idx) + (case.target_stmts[-1],),
                tuple(case.reference_stmts[i] for i in idx) + (case.reference_stmts[-1],),
            )

        # tables never created in-script are external and stay out of the check
        script_tables = {s.name for s in case.target_stmts if isinstance(s, CreateTable)}

        def valid(candidate: CampaignCase) -> bool:
            created = {s.name for s in candidate.target_stmts if isinstance(s, CreateTable)}
            needed = set()
            for stmt in candidate.target_stmts:
                if isinstance(stmt, CreateTable):
                    continue
                needed |= referenced_tables(stmt)
                if hasattr(stmt, "table"):
                    needed.add(stmt.table)
            return (needed & script_tables) <= created

        try:
            outcome = ddmin(
                body_indices,
                lambda kept: valid(build(kept)) and pred(build(kept)),
            )
            reduced = build(list(outcome.units))
            trace = (("statements", len(body_indices) + 1, len(outcome.units) + 1),)
        except FlakyPredicate:
            flaky = True
    return reduced, flaky, trace


# -- live / record ------------------------------------------------------------


def _live_executors(cfg: CampaignConfig, worker: int, sinks):
    from .executor import RecordingExecutor

    target = make_executor(cfg.target)
    reference = make_executor(cfg.reference)
    if cfg.mode == "record":
        target = RecordingExecutor(target, sinks[0])
        reference = RecordingExecutor(reference, sinks[1])
    return target, reference


PROBE_TABLE = "sqlxd_probe"


def _install_probe_schema(target, reference):
    """The registry templates run against a one-row probe table; install it
    on both systems before probing."""
    ddl = parse_script(
        f"CREATE TABLE {PROBE_TABLE} (c0 INT, c1 STRING, ts TIMESTAMP) TIMESTAMP(ts)"
    )[0]
    row = parse_script(
        f"INSERT INTO {PROBE_TABLE} VALUES (0, 'a', '2023-01-01T00:00:00.000000')"
    )[0]
    for executor, stmt in ((target, ddl), (reference, map_ddl(ddl))):
        executor.execute_text(f"DROP TABLE IF EXISTS {PROBE_TABLE}")
        executor.execute_text(render(stmt, executor.dialect))
        executor.execute_text(render(row, executor.dialect))


def _run_live(cfg: CampaignConfig, collector: _Collector):
    if not cfg.registry_path:
        raise CampaignError("live mode requires a clause registry path")
    descriptors = load_registry(cfg.registry_path)
    sinks = _record_sinks(cfg)
    probe_target, probe_reference = _live_executors(cfg, 0, sinks)
    try:
        if cfg.target.kind != "fixture":
            _install_probe_schema(probe_target, probe_reference)
        records = probe_all(descriptors, probe_target, probe_reference)
        pool = build_pool(records, DEFAULT_RULES)
    except ConnectionLost as exc:
        collector.abort(f"probe phase: {exc}")
        _close_sinks(cfg, sinks)
        return
    finally:
        probe_target.close()
        probe_reference.close()
    if "select" not in pool.effective():
        raise CampaignError("probing produced an unusable pool (no shared SELECT)")
    budget = cfg.queries if cfg.queries is not None else None
    deadline = time.monotonic() + cfg.duration if cfg.duration is not None else None
    workers = max(1, cfg.workers)
    counter = {"issued": 0}
    lock = threading.Lock()

    def take() -> bool:
        with lock:
            if budget is not None and counter["issued"] >= budget:
                return False
            if deadline is not None and time.monotonic() > deadline:
                return False
            counter["issued"] += 1
            return True

    def worker_loop(index: int):
        target, reference = _live_executors(cfg, index, sinks)
        try:
            _worker_iterations(cfg, collector, pool, index, target, reference, take)
        except ConnectionLost as exc:
            collector.abort(f"worker {index}: {exc}")
        finally:
            target.close()
            reference.close()

    if workers == 1:
        worker_loop(0)
    else:
        threads = [threading.Thread(target=worker_loop, args=(i,)) for i in range(workers)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
    _close_sinks(cfg, sinks)


def _record_sinks(cfg):
    if cfg.mode != "record":
        return (lambda rec: None, lambda rec: None, None)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "fixtures.jsonl")
    fh = open(path, "w", encoding="utf-8")
    lock = threading.Lock()

    def sink(record):
        with lock:
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    return (sink, sink, fh)


def _close_sinks(cfg, sinks):
    if len(sinks) > 2 and sinks[2] is not None:
        sinks[2].close()


def _worker_iterations(cfg, collector, pool, index, target, reference, take):
    gen_cfg = replace(cfg.gen, seed=cfg.gen.seed ^ index,
                      table_prefix=cfg.gen.table_prefix or f"sxd{index}_")
    schema = None
    engine = None
    inserts = None
    iteration = 0
    qgen = None
    while take():
        if schema is None or iteration % cfg.refresh_interval == 0:
            schema = gen_schema(replace(gen_cfg, seed=gen_cfg.seed + iteration), target.dialect)
            inserts = gen_data(schema, replace(gen_cfg, seed=gen_cfg.seed + iteration))
            engine = MappingEngine(DEFAULT_RULES, list(schema.tables))
            qgen = QueryGenerator(schema, pool, replace(gen_cfg, seed=gen_cfg.seed + iteration),
                                  target.dialect)
            _install_schema(schema, inserts, target, reference)
        iteration += 1
        query = qgen.query()
        try:
            mq = engine.apply(query)
        except UnmappableConstruct:
            collector.skipped()
            continue
        t_out = target.execute_text(render(mq.original, target.dialect))
        r_out = reference.execute_text(render(mq.mapped, reference.dialect))
        verdict = compare(t_out, r_out, _ordered(mq.original), cfg.classifier)
        plan = reference.explain_text(render(mq.mapped, reference.dialect))
        collector.record_verdict(verdict, plan)
        if cfg.target.explain:
            # plan formats vary across targets, so fingerprinting them is opt-in
            with collector.lock:
                collector.plans.add(target.explain_text(render(mq.original, target.dialect)))
        if verdict is Verdict.EXPECTED_ERROR:
            collector.add_review(
                f"seed={cfg.seed} worker={index} iter={iteration}: reference refused mapped query"
            )
            continue
        if verdict not in VERDICT_KIND:
            continue
        report = _reduce_live_finding(cfg, collector, schema, inserts, query, mq, verdict,
                                      t_out, r_out, plan, target, reference, engine)
        if report is not None:
            collector.offer(report)


def _install_schema(schema, inserts, target, reference):
    for table in schema.tables:
        target.execute_text(f"DROP TABLE IF EXISTS {table.name}")
        reference.execute_text(f"DROP TABLE IF EXISTS {table.name}")
        target.execute_text(render(table, target.dialect))
        reference.execute_text(render(map_ddl(table), reference.dialect))
    for stmt in inserts:
        target.execute_text(render(stmt, target.dialect))
        reference.execute_text(render(stmt, reference.dialect))


def _reduce_live_finding(cfg, collector, schema, inserts, query, mq, verdict,
                         t_out, r_out, plan, target, reference, engine):
    case = ReproCase(tuple(schema.tables), tuple(inserts), query)

    def pred(candidate: ReproCase) -> bool:
        try:
            cmq = MappingEngine(DEFAULT_RULES, list(candidate.creates)).apply(candidate.query)
        except UnmappableConstruct:
            return False
        for table in candidate.creates:
            target.execute_text(f"DROP TABLE IF EXISTS {table.name}")
            reference.execute_text(f"DROP TABLE IF EXISTS {table.name}")
            target.execute_text(render(table, target.dialect))
            reference.execute_text(render(map_ddl(table), reference.dialect))
        for stmt in candidate.inserts:
            target.execute_text(render(stmt, target.dialect))
            reference.execute_text(render(stmt, reference.dialect))
        t = target.execute_text(render(cmq.original, target.dialect))
        r = reference.execute_text(render(cmq.mapped, reference.dialect))
        return compare(t, r, _ordered(cmq.original), cfg.classifier) is verdict

    flaky = False
    try:
        reduced = reduce_case(case, pred, target.dialect, cfg.reduction_budget)
    except FlakyPredicate:
        reduced = ReducedCase(case, (("flaky", 0, 0),), minimal=False)
        flaky = True
    final = reduced.case
    final_mq = MappingEngine(DEFAULT_RULES, list(final.creates)).apply(final.query)
    reduced_target = (*final.creates, *final.inserts, final_mq.original)
    reduced_reference = (
        *(map_ddl(c) for c in final.creates),
        *final.inserts,
        final_mq.mapped,
    )
    report = BugReport(
        id=report_id(reduced_target, target.dialect),
        kind=VERDICT_KIND[verdict],
        verdict=verdict,
        case_name=f"live-seed{cfg.seed}",
        reduced_target=reduced_target,
        reduced_reference=reduced_reference,
        original_target=(*case.creates, *case.inserts, mq.original),
        applied_rules=final_mq.applied_rules,
        target_outcome=t_out,
        reference_outcome=_with_plan(r_out, plan),
        seed=cfg.seed,
        config_snapshot={"mode": cfg.mode},
        flaky=flaky,
        trace=reduced.trace,
    )
    # re-install the campaign schema for the remaining iterations
    _install_schema(schema, inserts, target, reference)
    return report
