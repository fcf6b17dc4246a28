"""Shared helpers: the exhaustive NULL-model alignment enumeration and a
small stub executor for campaign tests."""

import itertools

from sqlxd.executor import ExecOutcome, Executor, rows_outcome
from sqlxd.mapping import apply_mappings
from sqlxd.oracle import THREE_VALUED, VALUE_NULL, eval_expr
from sqlxd.sqlast import (
    Between,
    BoolOp,
    ColumnRef,
    Comparison,
    InList,
    IsNull,
    Literal,
    Not,
    Select,
    SelectItem,
    TableRef,
    T_INTEGER,
    QUESTDB,
)

SCALARS = (None, -1, 0, 1)


def lit(v):
    return Literal(v, T_INTEGER)


def leaf_expressions(column: str):
    """Comparison-class leaves over one column: IN lists up to 3 elements,
    BETWEEN bounds, all comparison operators, IS NULL."""
    col = ColumnRef(column)
    leaves = []
    for size in (1, 2, 3):
        for items in itertools.product(SCALARS, repeat=size):
            leaves.append(InList(col, tuple(lit(v) for v in items)))
    for low, high in itertools.product(SCALARS, repeat=2):
        leaves.append(Between(col, lit(low), lit(high)))
    for op in ("=", "!=", "<", "<=", ">", ">="):
        for v in SCALARS:
            leaves.append(Comparison(op, col, lit(v)))
    leaves.append(IsNull(col))
    leaves.append(IsNull(col, negated=True))
    return leaves


def representative_leaves(column: str):
    col = ColumnRef(column)
    return [
        InList(col, (lit(0), lit(None))),
        InList(col, (lit(-1), lit(0), lit(1))),
        Between(col, lit(0), lit(1)),
        Between(col, lit(1), lit(0)),
        Between(col, lit(None), lit(1)),
        Comparison("=", col, lit(0)),
    ]


def alignment_cases():
    """(expression, columns) pairs spanning the m02/m08 scalar subset with
    boolean nestings to depth 2."""
    cases = [(leaf, ("c0",)) for leaf in leaf_expressions("c0")]
    l0 = representative_leaves("c0")
    l1 = representative_leaves("c1")
    for leaf in l0:
        cases.append((Not(leaf), ("c0",)))
    for a in l0:
        for b in l1:
            for op in ("and", "or"):
                cases.append((BoolOp(op, a, b), ("c0", "c1")))
                cases.append((Not(BoolOp(op, a, b)), ("c0", "c1")))
    for a in l0:
        for b in l1:
            for c in l0:
                cases.append(
                    (BoolOp("or", BoolOp("and", a, b), c), ("c0", "c1"))
                )
    return cases


def check_alignment(expr, columns):
    """Number of bindings checked; raises AssertionError on any mismatch."""
    stmt = Select(projections=(SelectItem(expr),), from_items=(TableRef("test"),))
    mq = apply_mappings(stmt)
    original = mq.original.projections[0].expr
    mapped = mq.mapped.projections[0].expr
    checked = 0
    for values in itertools.product(SCALARS, repeat=len(columns)):
        binding = dict(zip(columns, values))
        target_view = eval_expr(original, binding, VALUE_NULL)
        reference_view = eval_expr(mapped, binding, THREE_VALUED)
        assert _same(target_view, reference_view), (
            f"misaligned for {binding}: target={target_view!r} "
            f"reference={reference_view!r} expr={expr!r}"
        )
        checked += 1
    return checked


def _same(a, b) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return a == b


class StubExecutor(Executor):
    """Canned executor: DDL and inserts succeed; queries run through the
    responder callable (sql -> ExecOutcome)."""

    def __init__(self, endpoint_id, dialect, responder, plan="Result  (cost=0.00..0.01 rows=1 width=4)"):
        self.endpoint_id = endpoint_id
        self.dialect = dialect
        self.responder = responder
        self.plan = plan
        self.log = []

    def execute_text(self, sql: str) -> ExecOutcome:
        self.log.append(sql)
        if not sql.startswith("SELECT") and not sql.startswith("("):
            return rows_outcome([], [])
        return self.responder(sql)

    def explain_text(self, sql: str):
        return self.plan
