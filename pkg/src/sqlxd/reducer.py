"""Delta-debugging reduction of discrepancy-inducing cases.

ddmin shrinks a unit list to a 1-minimal subset preserving the predicate;
reduce_case drives it in phases over a whole repro script, ordered to cut
execution cost fastest: insert rows, then tables, then projections, then
clauses and set-operation branches, then subquery flattening. Every
candidate is re-validated through the parser and re-mapped before the
predicate runs, so a reduced case always re-renders, re-parses, and
re-maps.

Predicates are treated as deterministic; a predicate that flips on an
identical input aborts reduction with FlakyPredicate rather than risk a
silently mis-minimized repro.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import FlakyPredicate
from .parse import parse
from .render import render
from .sqlast import (
    Join,
    Select,
    SetOp,
    SubquerySource,
    TableRef,
    iter_selects,
)


@dataclass
class ReductionPredicate:
    """Re-execution closure plus its evaluation budget."""

    run: object  # callable(candidate) -> bool
    budget: int = 2000

    invocations: int = 0
    budget_exceeded: bool = False

    def __call__(self, candidate) -> bool:
        if self.invocations >= self.budget:
            self.budget_exceeded = True
            raise _BudgetStop()
        self.invocations += 1
        return bool(self.run(candidate))


class _BudgetStop(Exception):
    pass


@dataclass(frozen=True)
class ReductionOutcome:
    units: tuple
    minimal: bool
    invocations: int


def ddmin(units, pred) -> ReductionOutcome:
    """Zeller's ddmin over an ordered unit list.

    Returns a sublist satisfying the predicate that is 1-minimal unless the
    budget ran out first (then the best case so far is returned, flagged
    non-minimal). Raises FlakyPredicate when the full input does not
    satisfy the predicate or the final result stops satisfying it.
    """
    if not isinstance(pred, ReductionPredicate):
        pred = ReductionPredicate(pred)
    units = list(units)
    cache = {}

    def test(subset) -> bool:
        key = tuple(subset)
        if key not in cache:
            cache[key] = pred(list(subset))
        return cache[key]

    try:
        if not test(units):
            raise FlakyPredicate("predicate is false on the full unit list")
        current = units
        n = 2
        while len(current) >= 2:
            start = 0
            reduced = False
            subset_length = len(current) // n
            chunks = [
                current[i * subset_length: (i + 1) * subset_length if i < n - 1 else len(current)]
                for i in range(n)
            ]
            for chunk in chunks:
                if chunk and len(chunk) < len(current) and test(chunk):
                    current, n, reduced = chunk, 2, True
                    break
            if reduced:
                continue
            for i in range(n):
                complement = [u for j, c in enumerate(chunks) for u in c if j != i]
                if complement and len(complement) < len(current) and test(complement):
                    current, n, reduced = complement, max(2, n - 1), True
                    break
            if reduced:
                continue
            if n < len(current):
                n = min(len(current), 2 * n)
            else:
                break
        if len(current) == 1 and test([]):
            current = []
        # uncached re-check: detects predicates that flip on identical input
        if current and not pred(list(current)):
            raise FlakyPredicate("predicate flipped on the reduced unit list")
        return ReductionOutcome(tuple(current), True, pred.invocations)
    except _BudgetStop:
        best = min((k for k, v in cache.items() if v), key=len, default=tuple(units))
        return ReductionOutcome(tuple(best), False, pred.invocations)


# ---------------------------------------------------------------------------
# Whole-case reduction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReproCase:
    """A self-contained repro: DDL, data, and the target-dialect query."""

    creates: tuple  # CreateTable
    inserts: tuple  # Insert
    query: object  # Select | SetOp

    def statements(self) -> tuple:
        return (*self.creates, *self.inserts, self.query)

    def script(self, dialect) -> str:
        return ";\n".join(render(s, dialect) for s in self.statements()) + ";"


@dataclass(frozen=True)
class ReducedCase:
    case: ReproCase
    trace: tuple  # (phase, units_before, units_after)
    minimal: bool = True
    invocations: int = 0


def referenced_tables(stmt) -> frozenset:
    names = set()
    if isinstance(stmt, (Select, SetOp)):
        for sel in iter_selects(stmt):
            for fi in sel.from_items:
                names |= _from_tables(fi)
    return frozenset(names)


def _from_tables(fi) -> set:
    if isinstance(fi, TableRef):
        return {fi.name}
    if isinstance(fi, Join):
        return _from_tables(fi.left) | _from_tables(fi.right)
    if isinstance(fi, SubquerySource):
        return set(referenced_tables(fi.query))
    if hasattr(fi, "table"):
        return {fi.table.name}
    return set()


def _valid(case: ReproCase, dialect) -> bool:
    """Re-render and re-parse the candidate; invalid candidates never reach
    the predicate."""
    if not referenced_tables(case.query) <= {c.name for c in case.creates}:
        return False
    try:
        for stmt in case.statements():
            if parse(render(stmt, dialect), dialect) != stmt:
                return False
    except Exception:
        return False
    return True


def reduce_case(case: ReproCase, pred, dialect, budget: int = 2000) -> ReducedCase:
    """Phased ddmin over a repro case; pred is the caller's re-execution
    closure over candidate cases (it is expected to re-map and execute)."""
    shared = ReductionPredicate(pred, budget)
    trace = []

    def guarded(builder):
        def inner(units):
            candidate = builder(units)
            if candidate is None or not _valid(candidate, dialect):
                return False
            return shared.run(candidate)

        return inner

    def run_phase(name, units, builder):
        nonlocal case
        if len(units) <= 1:
            return
        gp = ReductionPredicate(guarded(builder), budget - shared.invocations)
        try:
            outcome = ddmin(units, gp)
        finally:
            shared.invocations += gp.invocations
            shared.budget_exceeded = shared.budget_exceeded or gp.budget_exceeded
        rebuilt = builder(list(outcome.units))
        if rebuilt is not None and _valid(rebuilt, dialect):
            case = rebuilt
        trace.append((name, len(units), len(outcome.units)))

    if not pred(case):
        raise FlakyPredicate("predicate is false on the original case")

    # phase 1: insert rows
    run_phase("rows", list(case.inserts),
              lambda kept, c=case: replace_case(case, inserts=tuple(kept)))

    # phase 2: tables (drops a table's DDL together with its inserts)
    def build_tables(kept):
        names = {t.name for t in kept}
        return replace_case(
            case,
            creates=tuple(kept),
            inserts=tuple(i for i in case.inserts if i.table in names),
        )

    run_phase("tables", list(case.creates), build_tables)

    # phase 3: top-level projections
    if isinstance(case.query, Select) and len(case.query.projections) > 1:
        def build_projections(kept):
            if not kept:
                return None
            q = replace(case.query, projections=tuple(kept))
            return replace_case(case, query=q)

        run_phase("projections", list(case.query.projections), build_projections)

    # phase 4: set-operation branches (ddmin over positions: branches repeat)
    if isinstance(case.query, SetOp):
        branches = list(case.query.branches())
        ops = _branch_ops(case.query)

        def build_branches(kept_positions):
            if not kept_positions:
                return None
            rebuilt = _rebuild_setop(sorted(kept_positions), branches, ops)
            return replace_case(case, query=rebuilt)

        run_phase("setop-branches", list(range(len(branches))), build_branches)

    # phases 5 and 6: one-shot clause removals and subquery flattening;
    # candidates are re-derived after every acceptance
    try:
        changed = True
        while changed and shared.invocations < budget:
            changed = False
            for name, candidate in list(_clause_removals(case)) + list(_subquery_flattenings(case)):
                if shared.invocations >= budget:
                    break
                if _valid(candidate, dialect) and shared(candidate):
                    trace.append((name, 1, 0))
                    case = candidate
                    changed = True
                    break
    except _BudgetStop:
        pass

    if not pred(case):
        raise FlakyPredicate("predicate flipped on the reduced case")
    return ReducedCase(case, tuple(trace), not shared.budget_exceeded, shared.invocations)


def replace_case(case: ReproCase, **kw) -> ReproCase:
    return replace(case, **kw)


def _branch_ops(setop: SetOp) -> list:
    """Operators aligned with branches[1:] in left-to-right order."""
    ops = []

    def walk(node):
        if isinstance(node, SetOp):
            walk(node.left)
            ops.append(node.op)
            walk(node.right)

    walk(setop)
    return ops


def _rebuild_setop(kept_positions, branches, ops):
    current = branches[kept_positions[0]]
    for pos in kept_positions[1:]:
        current = SetOp(ops[pos - 1], current, branches[pos])
    return current


def _clause_removals(case: ReproCase):
    query = case.query
    if not isinstance(query, Select):
        return
    if query.where is not None:
        yield "drop-where", replace_case(case, query=replace(query, where=None))
    if query.order_by:
        yield "drop-order-by", replace_case(case, query=replace(query, order_by=()))
    if query.limit is not None:
        yield "drop-limit", replace_case(case, query=replace(query, limit=None))
    if query.distinct:
        yield "drop-distinct", replace_case(case, query=replace(query, distinct=False))
    if query.group_by:
        yield "drop-group-by", replace_case(case, query=replace(query, group_by=()))
    if isinstance(query.from_items, tuple) and len(query.from_items) == 1:
        fi = query.from_items[0]
        if isinstance(fi, Join):
            for side, label in ((fi.left, "keep-join-left"), (fi.right, "keep-join-right")):
                if isinstance(side, (TableRef, SubquerySource)):
                    yield label, replace_case(case, query=replace(query, from_items=(side,)))


def _subquery_flattenings(case: ReproCase):
    query = case.query
    if not isinstance(query, Select):
        return
    for i, fi in enumerate(query.from_items):
        if not isinstance(fi, SubquerySource):
            continue
        inner = fi.query
        if (
            isinstance(inner, Select)
            and len(inner.from_items) == 1
            and isinstance(inner.from_items[0], TableRef)
            and inner.from_items[0].alias is None
            and inner.where is None
            and not inner.group_by
            and inner.sample_by is None
            and inner.latest_on is None
        ):
            flattened = TableRef(inner.from_items[0].name, fi.alias)
            items = query.from_items[:i] + (flattened,) + query.from_items[i + 1:]
            yield "flatten-subquery", replace_case(case, query=replace(query, from_items=items))
