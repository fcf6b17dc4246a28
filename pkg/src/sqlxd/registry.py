"""Clause registry: probe candidate clauses against both executors and
classify them Shared / Failed / Mappable.

Candidates ship as static data files per target system; probing sends each
template's target-dialect text verbatim to both endpoints, because the
question a probe answers is precisely "does this system accept this
syntax". The effective generation pool is the shared set plus every
mappable clause that has a registered rewrite rule; mappable clauses
without a rule are excluded and reported so they cannot produce guaranteed
false alarms.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

from .errors import ConnectionLost
from .sqlast import (
    Between,
    CaseWhen,
    Cast,
    CreateTable,
    FuncCall,
    Insert,
    InList,
    IsNull,
    Join,
    Select,
    SetOp,
    SubqueryExpr,
    SubquerySource,
    TimestampIn,
    WindowFunc,
    WindowTable,
    SYMBOL,
    iter_exprs,
    iter_selects,
)


class ClauseStatus(enum.Enum):
    UNPROBED = "unprobed"
    SHARED = "shared"
    FAILED = "failed"
    MAPPABLE = "mappable"


CATEGORIES = ("clause", "function", "type", "feature")


@dataclass
class ClauseDescriptor:
    """A probeable clause/feature with a template query over the probe schema."""

    id: str
    category: str
    template_sql: str
    notes: str = ""
    status: ClauseStatus = ClauseStatus.UNPROBED

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}")

    def set_status(self, status: ClauseStatus):
        if self.status is not ClauseStatus.UNPROBED:
            raise ValueError(f"{self.id}: status already {self.status.value}")
        if status is ClauseStatus.UNPROBED:
            raise ValueError("cannot transition back to unprobed")
        self.status = status


@dataclass(frozen=True)
class ProbeOutcome:
    ok: bool
    error: str = ""


@dataclass(frozen=True)
class ProbeRecord:
    descriptor_id: str
    target: ProbeOutcome
    reference: ProbeOutcome
    status: ClauseStatus


def load_registry(path) -> list:
    """One JSON record per line: {id, category, template, notes}."""
    descriptors = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rec = json.loads(line)
            descriptors.append(
                ClauseDescriptor(rec["id"], rec["category"], rec["template"],
                                 rec.get("notes", ""))
            )
    ids = [d.id for d in descriptors]
    if len(ids) != len(set(ids)):
        raise ValueError(f"duplicate descriptor ids in {path}")
    return descriptors


def probe(descriptor: ClauseDescriptor, executor) -> ProbeOutcome:
    """One execution of the instantiated template; the registry stays
    unmodified. ConnectionLost propagates: it is retryable and distinct
    from an error outcome."""
    outcome = executor.execute_text(descriptor.template_sql)
    if outcome.status == "rows":
        return ProbeOutcome(True)
    return ProbeOutcome(False, outcome.error_text)


def probe_with_retry(descriptor: ClauseDescriptor, executor, retries: int = 3) -> ProbeOutcome:
    """Retry transient connection faults before letting classification see
    an outcome, so a blip cannot misclassify a clause."""
    last = None
    for _ in range(retries):
        try:
            return probe(descriptor, executor)
        except ConnectionLost as exc:
            last = exc
    raise last


def classify(target: ProbeOutcome, reference: ProbeOutcome) -> ClauseStatus:
    """Total and deterministic over the four outcome combinations."""
    if target.ok and reference.ok:
        return ClauseStatus.SHARED
    if not target.ok and not reference.ok:
        return ClauseStatus.FAILED
    return ClauseStatus.MAPPABLE


def probe_all(descriptors, target_executor, reference_executor, retries: int = 3) -> list:
    records = []
    for desc in descriptors:
        t = probe_with_retry(desc, target_executor, retries)
        r = probe_with_retry(desc, reference_executor, retries)
        status = classify(t, r)
        desc.set_status(status)
        records.append(ProbeRecord(desc.id, t, r, status))
    return records


@dataclass(frozen=True)
class ClausePool:
    """Clause sets the generator may draw from.

    shared is the intersection of both systems' supported sets; mapped
    holds mappable clauses backed by a rewrite rule. The two are disjoint
    by construction and their union is the effective pool.
    """

    target_supported: frozenset
    reference_supported: frozenset
    shared: frozenset
    mapped: frozenset
    warnings: tuple = ()

    def __post_init__(self):
        if not self.shared <= self.target_supported:
            raise ValueError("shared must be target-supported")
        if not self.shared <= self.reference_supported:
            raise ValueError("shared must be reference-supported")
        if self.mapped & self.shared:
            raise ValueError("mapped and shared must be disjoint")

    def effective(self) -> frozenset:
        return self.shared | self.mapped


def build_pool(records, rules) -> ClausePool:
    """Pool from probe records; mappable descriptors without a rule are
    excluded and listed as warnings."""
    from .mapping import rules_by_clause

    ruled = rules_by_clause(rules)
    target_supported = frozenset(r.descriptor_id for r in records if r.target.ok)
    reference_supported = frozenset(r.descriptor_id for r in records if r.reference.ok)
    shared = frozenset(r.descriptor_id for r in records if r.status is ClauseStatus.SHARED)
    mapped = set()
    warnings = []
    for rec in records:
        if rec.status is not ClauseStatus.MAPPABLE:
            continue
        if rec.descriptor_id in ruled:
            mapped.add(rec.descriptor_id)
        else:
            warnings.append(rec.descriptor_id)
    return ClausePool(
        target_supported, reference_supported, shared, frozenset(mapped), tuple(sorted(warnings))
    )


def pool_from_ids(ids) -> ClausePool:
    """All-shared pool for tests and offline generation."""
    s = frozenset(ids)
    return ClausePool(s, s, s, frozenset())


# ---------------------------------------------------------------------------
# Clause usage extraction
# ---------------------------------------------------------------------------

_FUNC_IDS = {
    "count": "count",
    "count_distinct": "count_distinct",
    "avg": "avg",
    "min": "min",
    "max": "max",
    "sum": "sum",
    "abs": "abs",
    "dateadd": "dateadd",
    "datediff": "datediff",
    "date_trunc": "date_trunc",
    "now": "now",
}

_SETOP_IDS = {
    "union": "union",
    "union-all": "union_all",
    "except": "except",
    "intersect": "intersect",
}


def clause_ids(stmt) -> frozenset:
    """Registry clause ids a statement uses; drives pool-closure checks and
    the usage histogram."""
    ids = set()
    if isinstance(stmt, CreateTable):
        if any(c.dtype.variant == SYMBOL for c in stmt.columns):
            ids.add("symbol_type")
        return frozenset(ids)
    if isinstance(stmt, Insert):
        return frozenset()
    if isinstance(stmt, SetOp):
        ids.add(_SETOP_IDS[stmt.op])
        for branch in (stmt.left, stmt.right):
            ids |= clause_ids(branch)
        return frozenset(ids)
    for sel in iter_selects(stmt):
        ids.add("select")
        if sel.where is not None:
            ids.add("where")
        if sel.group_by:
            ids.add("group_by")
        if sel.order_by:
            ids.add("order_by")
        if sel.limit is not None:
            ids.add("limit")
        if sel.distinct:
            ids.add("distinct")
        if sel.sample_by is not None:
            ids.add("sample_by")
            if sel.sample_by.fill is not None:
                ids.add("sample_by_fill")
        if sel.latest_on is not None:
            ids.add("latest_on")
        for fi in sel.from_items:
            ids |= _from_item_ids(fi)
    for e in iter_exprs(stmt):
        if isinstance(e, InList):
            ids.add("in_list")
        elif isinstance(e, TimestampIn):
            ids.add("timestamp_in")
        elif isinstance(e, Between):
            ids.add("symmetric_between" if e.symmetric else "between")
        elif isinstance(e, IsNull):
            ids.add("is_null")
        elif isinstance(e, CaseWhen):
            ids.add("case_when")
        elif isinstance(e, FuncCall) and e.name in _FUNC_IDS:
            ids.add(_FUNC_IDS[e.name])
        elif isinstance(e, WindowFunc):
            ids.add("window_function")
        elif isinstance(e, Cast):
            ids.add("cast")
            if e.dtype.variant == SYMBOL:
                ids.add("symbol_type")
        elif isinstance(e, SubqueryExpr):
            ids.add("scalar_subquery")
            for sub in (e.query,) if isinstance(e.query, Select) else e.query.branches():
                ids |= clause_ids(sub)
    return frozenset(ids)


def _from_item_ids(fi) -> set:
    ids = set()
    if isinstance(fi, Join):
        ids.add("cross_join" if fi.kind == "cross" else "inner_join")
        ids |= _from_item_ids(fi.left)
        ids |= _from_item_ids(fi.right)
    elif isinstance(fi, SubquerySource):
        ids.add("subquery")
        ids |= clause_ids(fi.query)
    elif isinstance(fi, WindowTable):
        ids.add(fi.kind)
    return ids
