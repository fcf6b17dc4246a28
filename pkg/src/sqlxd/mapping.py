"""Clause mapping rules: rewrite target-dialect statements into reference
SQL, recording which rules fired.

Rules come in two kinds. Translation rules (reference side only) replace a
construct the reference system lacks: time-bucket sampling becomes a grouped
subquery over extract(), latest-row selection becomes a join against a
windowed max, tumble/hop become date_trunc subqueries, count_distinct
becomes count(DISTINCT), timestamp range membership becomes BETWEEN, and
reversed ranges gain the SYMMETRIC keyword the reference requires.

Alignment rules apply to BOTH sides of the pair: their output is shared
syntax whose evaluation no longer depends on the two systems' divergent
NULL treatment. The null guard wraps comparison-class expressions in value
position with CASE WHEN x IS NULL THEN NULL, and strips NULL literals out
of IN lists, so the target stops reporting definite booleans where the
reference reports NULL. Filter positions are left alone: there a NULL and
a FALSE filter identically, and guarding them would change nothing except
the SQL shape.

Rules apply bottom-up in registration order until a fixed point; every
rewriter removes its matched construct, so application terminates within
nodes x rules steps. Generated aliases use the reserved "__sqlxd_" prefix
to avoid capturing user identifiers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import UnmappableConstruct
from .sqlast import (
    Arith,
    child_exprs,
    Between,
    BoolOp,
    CaseWhen,
    Cast,
    ColumnDef,
    ColumnRef,
    Comparison,
    CreateTable,
    DataType,
    Extract,
    FuncCall,
    Insert,
    Interval,
    InList,
    IsNull,
    Join,
    Literal,
    Not,
    OrderItem,
    Select,
    SelectItem,
    SetOp,
    Star,
    SubqueryExpr,
    SubquerySource,
    TableRef,
    TimestampIn,
    WindowFunc,
    WindowTable,
    STRING,
    SYMBOL,
    T_BOOLEAN,
    T_INTEGER,
    T_TIMESTAMP,
    construct_supported,
    dialect_only_constructs,
)

ALIAS_PREFIX = "__sqlxd_"

# expression positions
VALUE = "value"
TRUTH = "truth"
SCALAR = "scalar"
SORT = "sort"


@dataclass(frozen=True)
class MappingRule:
    """AST matcher plus rewriter, direction target-dialect -> reference.

    level selects the node family the rule inspects; applies_to "both"
    marks alignment rules whose output replaces the target-side query too;
    scope "value" restricts a rule to value positions. clause_id links the
    rule to the probeable clause it unlocks (None for alignment rules,
    which guard clauses that are already shared).
    """

    id: str
    clause_id: Optional[str]
    level: str  # "expr" | "select" | "from" | "ddl"
    matcher: Callable
    rewriter: Callable
    applies_to: str = "reference"  # "reference" | "both"
    scope: str = "any"  # "any" | "value"
    description: str = ""


@dataclass(frozen=True)
class MappedQuery:
    original: object  # statement as the target executes it (Q1)
    mapped: object  # statement as the reference executes it (Q2)
    applied_rules: tuple = ()


class MappingContext:
    """Schema lookups rewrites need: column lists and designated timestamps."""

    def __init__(self, tables=None):
        self.tables = {}
        for item in tables or ():
            if isinstance(item, CreateTable):
                self.tables[item.name] = item
        if isinstance(tables, dict):
            self.tables = dict(tables)

    def columns(self, table: str):
        create = self.tables.get(table)
        return create.columns if create is not None else None

    def designated_ts(self, table: str):
        create = self.tables.get(table)
        if create is not None and create.designated_ts:
            return create.designated_ts
        # fall back to the single timestamp column when unambiguous
        if create is not None:
            ts_cols = [c.name for c in create.columns if c.dtype.variant == "timestamp"]
            if len(ts_cols) == 1:
                return ts_cols[0]
        return None


# ---------------------------------------------------------------------------
# m01: time-bucket sampling -> grouped subquery over extract()
# ---------------------------------------------------------------------------

_SAMPLE_UNITS = {"1h": "hour", "1d": "day"}


def _m01_match(node):
    return isinstance(node, Select) and node.sample_by is not None


def _m01_rewrite(node: Select, ctx: MappingContext):
    sample = node.sample_by
    if sample.fill is not None:
        raise UnmappableConstruct("sample-by", "fill modes have no mapping")
    unit = _SAMPLE_UNITS.get(sample.interval)
    if unit is None:
        raise UnmappableConstruct(
            "sample-by", f"interval {sample.interval!r}; only unit buckets 1h/1d map"
        )
    if len(node.from_items) != 1 or not isinstance(node.from_items[0], TableRef):
        raise UnmappableConstruct("sample-by", "requires a single plain table source")
    if node.latest_on is not None:
        raise UnmappableConstruct("sample-by", "cannot combine with latest-row selection")
    table = node.from_items[0]
    ts_col = ctx.designated_ts(table.name)
    if ts_col is None:
        raise UnmappableConstruct("sample-by", f"no designated timestamp known for {table.name!r}")
    inner_items = []
    outer_items = []
    for i, item in enumerate(node.projections):
        if not isinstance(item.expr, FuncCall):
            raise UnmappableConstruct("sample-by", "projections must be aggregate calls")
        alias = item.alias or f"{ALIAS_PREFIX}a{i}"
        inner_items.append(SelectItem(item.expr, alias))
        outer_items.append(SelectItem(ColumnRef(alias)))
    bucket = f"{ALIAS_PREFIX}b"
    inner_items.append(SelectItem(Extract(unit, ColumnRef(ts_col)), bucket))
    inner = Select(
        projections=tuple(inner_items),
        from_items=(table,),
        where=node.where,
        group_by=(ColumnRef(bucket),),
    )
    return Select(
        projections=tuple(outer_items),
        from_items=(SubquerySource(inner, f"{ALIAS_PREFIX}sample_by"),),
        order_by=node.order_by,
        limit=node.limit,
    )


# ---------------------------------------------------------------------------
# m02: null guard for comparison-class expressions in value position
# ---------------------------------------------------------------------------


def _null_literal(e) -> bool:
    return isinstance(e, Literal) and e.value is None


def _nullable_columns(*exprs):
    seen = []
    stack = list(exprs)
    while stack:
        e = stack.pop(0)
        if isinstance(e, ColumnRef):
            if e not in seen:
                seen.append(e)
        elif isinstance(e, (Arith, Cast, Extract)):
            stack.extend(child_exprs(e))
    return tuple(seen)


def _m02_match(node):
    if isinstance(node, InList) and not node.null_guarded:
        return (
            _null_literal(node.expr)
            or any(_null_literal(i) for i in node.items)
            or bool(_nullable_columns(node.expr))
        )
    if isinstance(node, Comparison) and not node.null_guarded:
        return (
            _null_literal(node.left)
            or _null_literal(node.right)
            or bool(_nullable_columns(node.left, node.right))
        )
    if isinstance(node, Between) and not node.null_guarded:
        return (
            any(_null_literal(e) for e in (node.expr, node.low, node.high))
            or bool(_nullable_columns(node.expr, node.low, node.high))
        )
    return False


def _guard(columns, inner):
    cond = IsNull(columns[0])
    for col in columns[1:]:
        cond = BoolOp("or", cond, IsNull(col))
    return CaseWhen(((cond, Literal(None, T_BOOLEAN)),), inner)


def _m02_rewrite(node, ctx):
    if isinstance(node, InList):
        if _null_literal(node.expr):
            return Literal(None, T_BOOLEAN)
        items = tuple(i for i in node.items if not _null_literal(i))
        inner = (
            InList(node.expr, items, null_guarded=True)
            if items
            else Literal(False, T_BOOLEAN)
        )
        columns = _nullable_columns(node.expr)
        return _guard(columns, inner) if columns else inner
    if isinstance(node, Comparison):
        if _null_literal(node.left) or _null_literal(node.right):
            return Literal(None, T_BOOLEAN)
        columns = _nullable_columns(node.left, node.right)
        inner = Comparison(node.op, node.left, node.right, null_guarded=True)
        return _guard(columns, inner) if columns else inner
    if isinstance(node, Between):
        if any(_null_literal(e) for e in (node.expr, node.low, node.high)):
            return Literal(None, T_BOOLEAN)
        columns = _nullable_columns(node.expr, node.low, node.high)
        inner = Between(node.expr, node.low, node.high, node.symmetric, null_guarded=True)
        return _guard(columns, inner) if columns else inner
    raise TypeError(type(node).__name__)


# ---------------------------------------------------------------------------
# m03/m04: date arithmetic functions -> cast arithmetic / extract difference
# ---------------------------------------------------------------------------

_DATEADD_SECONDS = {"s": 1, "m": 60, "h": 3600, "d": 86400}
_DATEDIFF_UNITS = {"y": "year", "m": "month", "d": "day", "h": "hour"}


def _m03_match(node):
    return isinstance(node, FuncCall) and node.name == "dateadd"


def _m03_rewrite(node: FuncCall, ctx):
    if len(node.args) != 3 or not isinstance(node.args[0], Literal) or not isinstance(node.args[1], Literal):
        raise UnmappableConstruct("dateadd", "expects (unit literal, amount literal, expr)")
    unit, amount, ts = node.args
    seconds_per = _DATEADD_SECONDS.get(str(unit.value))
    if seconds_per is None or amount.value is None:
        raise UnmappableConstruct("dateadd", f"unit {unit.value!r} is not seconds-expressible")
    total = int(amount.value) * seconds_per
    return Cast(
        Arith("+", Cast(ts, T_INTEGER), Literal(total, T_INTEGER)),
        T_TIMESTAMP,
    )


def _m04_match(node):
    return isinstance(node, FuncCall) and node.name == "datediff"


def _m04_rewrite(node: FuncCall, ctx):
    if len(node.args) != 3 or not isinstance(node.args[0], Literal):
        raise UnmappableConstruct("datediff", "expects (unit literal, expr, expr)")
    unit = _DATEDIFF_UNITS.get(str(node.args[0].value))
    if unit is None:
        raise UnmappableConstruct("datediff", f"unit {node.args[0].value!r} unsupported")
    left = Extract(unit, node.args[1])
    right = Extract(unit, node.args[2])
    return FuncCall("abs", (Arith("-", left, right),))


# ---------------------------------------------------------------------------
# m05: latest-row selection -> join against windowed max subquery
# ---------------------------------------------------------------------------


def _m05_match(node):
    return isinstance(node, Select) and node.latest_on is not None


def _m05_rewrite(node: Select, ctx: MappingContext):
    latest = node.latest_on
    if len(latest.partition_keys) != 1:
        raise UnmappableConstruct("latest-on", "single partition key supported")
    if (
        len(node.from_items) != 1
        or not isinstance(node.from_items[0], TableRef)
        or node.from_items[0].alias is not None
        or node.where is not None
        or node.group_by
        or node.sample_by is not None
        or node.projections != (SelectItem(Star()),)
    ):
        raise UnmappableConstruct("latest-on", "requires the bare SELECT * shape")
    table = node.from_items[0].name
    columns = ctx.columns(table)
    if columns is None:
        raise UnmappableConstruct("latest-on", f"column list for {table!r} unknown")
    ts = latest.ts_col.name
    key = latest.partition_keys[0].name
    t1, t2 = f"{ALIAS_PREFIX}t1", f"{ALIAS_PREFIX}t2"
    window = Select(
        projections=(
            SelectItem(WindowFunc(FuncCall("max", (ColumnRef(ts),)), (ColumnRef(key),)), ts),
            SelectItem(ColumnRef(key)),
        ),
        from_items=(TableRef(table),),
        distinct=True,
    )
    join = Join(
        "inner",
        TableRef(table, t1),
        SubquerySource(window, t2),
        BoolOp(
            "and",
            Comparison("=", ColumnRef(ts, t1), ColumnRef(ts, t2)),
            Comparison("=", ColumnRef(key, t1), ColumnRef(key, t2)),
        ),
    )
    inner = Select(
        projections=tuple(SelectItem(ColumnRef(c.name, t1)) for c in columns),
        from_items=(join,),
    )
    return Select(
        projections=(SelectItem(Star()),),
        from_items=(SubquerySource(inner, f"{ALIAS_PREFIX}latest_on"),),
        order_by=node.order_by,
        limit=node.limit,
        distinct=True,
    )


# ---------------------------------------------------------------------------
# m06: count_distinct(x) -> count(DISTINCT x)
# ---------------------------------------------------------------------------


def _m06_match(node):
    return isinstance(node, FuncCall) and node.name == "count_distinct"


def _m06_rewrite(node: FuncCall, ctx):
    if len(node.args) != 1:
        raise UnmappableConstruct("count_distinct", "expects one argument")
    return FuncCall("count", node.args, distinct=True)


# ---------------------------------------------------------------------------
# m08: reversed or non-literal ranges need the SYMMETRIC keyword
# ---------------------------------------------------------------------------


def _statically_ordered(low, high) -> bool:
    if not isinstance(low, Literal) or not isinstance(high, Literal):
        return False
    if low.value is None or high.value is None:
        return False
    try:
        return low.value <= high.value
    except TypeError:
        return False


def _m08_match(node):
    return (
        isinstance(node, Between)
        and not node.symmetric
        and not _statically_ordered(node.low, node.high)
    )


def _m08_rewrite(node: Between, ctx):
    return Between(node.expr, node.low, node.high, True, node.null_guarded)


# ---------------------------------------------------------------------------
# m09/m10: window table functions -> date_trunc subqueries
# ---------------------------------------------------------------------------

_INTERVAL_RE = re.compile(r"^(\d+)\s+(second|minute|hour|day)s?$")


def _parse_interval(interval: Interval):
    m = _INTERVAL_RE.match(interval.text.strip())
    if m is None:
        return None
    return int(m.group(1)), m.group(2)


def _window_table_rewrite(node: WindowTable, ctx):
    slide = _parse_interval(node.slide)
    if slide is None or slide[0] != 1:
        raise UnmappableConstruct(node.kind, f"slide {node.slide.text!r}; unit windows only")
    unit = slide[1]
    size = node.slide if node.kind == "tumble" else node.size
    ts = node.ts_col
    start = FuncCall("date_trunc", (Literal(unit, DataType(STRING)), ts))
    end = FuncCall("date_trunc", (Literal(unit, DataType(STRING)), Arith("+", ts, size)))
    inner = Select(
        projections=(
            SelectItem(Star()),
            SelectItem(start, "window_start"),
            SelectItem(end, "window_end"),
        ),
        from_items=(TableRef(node.table.name),),
        order_by=(OrderItem(ColumnRef("window_start")), OrderItem(ColumnRef("window_end"))),
    )
    return SubquerySource(inner, node.alias or f"{ALIAS_PREFIX}{node.kind}")


def _m09_match(node):
    return isinstance(node, WindowTable) and node.kind == "tumble"


def _m10_match(node):
    return isinstance(node, WindowTable) and node.kind == "hop"


# ---------------------------------------------------------------------------
# m11: timestamp range membership -> BETWEEN over the expanded period
# ---------------------------------------------------------------------------

_TSIN_RE = re.compile(r"^(\d{4})(?:-(\d{2}))?(?:;([+-]?\d+)d)?$")

_MONTH_DAYS = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)


def _leap(year: int) -> bool:
    return year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)


def _epoch_micros(year, month, day, h=0, mi=0, s=0) -> int:
    days = 0
    for y in range(1970, year):
        days += 366 if _leap(y) else 365
    for m in range(1, month):
        days += _MONTH_DAYS[m - 1] + (1 if m == 2 and _leap(year) else 0)
    days += day - 1
    return ((days * 86400) + h * 3600 + mi * 60 + s) * 1_000_000


def _m11_match(node):
    return isinstance(node, TimestampIn)


def _m11_rewrite(node: TimestampIn, ctx):
    m = _TSIN_RE.match(node.spec.strip())
    if m is None:
        raise UnmappableConstruct("timestamp-in", f"range spec {node.spec!r} unsupported")
    year = int(m.group(1))
    month = int(m.group(2)) if m.group(2) else None
    offset_days = int(m.group(3).replace("+", "")) if m.group(3) else 0
    if month is None:
        start = _epoch_micros(year, 1, 1)
        end = _epoch_micros(year, 12, 31, 23, 59, 59)
    else:
        if not 1 <= month <= 12:
            raise UnmappableConstruct("timestamp-in", f"month {month} out of range")
        start = _epoch_micros(year, month, 1)
        last = _MONTH_DAYS[month - 1] + (1 if month == 2 and _leap(year) else 0)
        end = _epoch_micros(year, month, last, 23, 59, 59)
    end += offset_days * 86400 * 1_000_000
    if end < start:
        raise UnmappableConstruct("timestamp-in", f"modifier empties the range in {node.spec!r}")
    return Between(node.expr, Literal(start, T_TIMESTAMP), Literal(end, T_TIMESTAMP))


# ---------------------------------------------------------------------------
# Rule registry
# ---------------------------------------------------------------------------

DEFAULT_RULES = (
    MappingRule("m01", "sample_by", "select", _m01_match, _m01_rewrite,
                description="time-bucket sampling via grouped extract() subquery"),
    MappingRule("m02", None, "expr", _m02_match, _m02_rewrite,
                applies_to="both", scope="value",
                description="null guard for value-position comparison expressions"),
    MappingRule("m03", "dateadd", "expr", _m03_match, _m03_rewrite,
                description="dateadd via integer cast arithmetic"),
    MappingRule("m04", "datediff", "expr", _m04_match, _m04_rewrite,
                description="datediff via extract() difference"),
    MappingRule("m05", "latest_on", "select", _m05_match, _m05_rewrite,
                description="latest-row selection via windowed max join"),
    MappingRule("m06", "count_distinct", "expr", _m06_match, _m06_rewrite,
                description="count_distinct(x) as count(DISTINCT x)"),
    MappingRule("m07", "symbol_type", "ddl", lambda node: isinstance(node, CreateTable),
                None, description="symbol columns as varchar(128) in DDL"),
    MappingRule("m08", "symmetric_between", "expr", _m08_match, _m08_rewrite,
                description="reversed ranges need explicit SYMMETRIC"),
    MappingRule("m09", "tumble", "from", _m09_match, _window_table_rewrite,
                description="tumble via date_trunc window columns"),
    MappingRule("m10", "hop", "from", _m10_match, _window_table_rewrite,
                description="hop via date_trunc window columns"),
    MappingRule("m11", "timestamp_in", "expr", _m11_match, _m11_rewrite,
                description="timestamp range membership as BETWEEN"),
)


def rules_by_clause(rules=DEFAULT_RULES) -> dict:
    return {r.clause_id: r for r in rules if r.clause_id is not None}


# ---------------------------------------------------------------------------
# DDL mapping
# ---------------------------------------------------------------------------


def map_ddl(stmt: CreateTable) -> CreateTable:
    """Reference-side DDL: symbol becomes varchar(128), the designated
    timestamp flag is dropped, column order is preserved."""
    columns = tuple(
        ColumnDef(c.name, DataType(STRING, 128)) if c.dtype.variant == SYMBOL else c
        for c in stmt.columns
    )
    return CreateTable(stmt.name, columns, None)


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------

_MAX_PASSES = 32


class MappingEngine:
    def __init__(self, rules=DEFAULT_RULES, schema=None):
        self.rules = tuple(rules)
        self.ctx = schema if isinstance(schema, MappingContext) else MappingContext(schema)

    def apply(self, stmt) -> MappedQuery:
        """Fixed-point rule application. The returned original is the
        statement as the target executes it (alignment rules applied); the
        mapped side renders under the reference dialect."""
        if isinstance(stmt, CreateTable):
            mapped = map_ddl(stmt)
            applied = ("m07",) if mapped != stmt or stmt.designated_ts else ()
            return MappedQuery(stmt, mapped, applied)
        if isinstance(stmt, Insert):
            return MappedQuery(stmt, stmt, ())
        both_rules = tuple(r for r in self.rules if r.applies_to == "both")
        original, _ = self._fixpoint(stmt, both_rules)
        mapped, applied = self._fixpoint(stmt, self.rules)
        self._check_mapped(mapped)
        return MappedQuery(original, mapped, tuple(applied))

    def _check_mapped(self, mapped):
        from .sqlast import POSTGRESQL

        for tag in sorted(dialect_only_constructs(mapped)):
            if not construct_supported(tag, POSTGRESQL):
                raise UnmappableConstruct(tag, "construct survived mapping with no rule")

    def _fixpoint(self, stmt, rules):
        applied = []
        current = stmt
        for _ in range(_MAX_PASSES):
            walker = _Walker(rules, self.ctx)
            current = walker.stmt(current)
            applied.extend(walker.fired)
            if not walker.fired:
                return current, _dedupe(applied)
        raise UnmappableConstruct("statement", "rule application did not reach a fixed point")


def apply_mappings(stmt, rules=DEFAULT_RULES, schema=None) -> MappedQuery:
    return MappingEngine(rules, schema).apply(stmt)


def _dedupe(ids):
    seen = []
    for i in ids:
        if i not in seen:
            seen.append(i)
    return seen


class _Walker:
    """One bottom-up pass: children first, then the rules at each node."""

    def __init__(self, rules, ctx):
        self.rules = rules
        self.ctx = ctx
        self.fired = []

    def _apply_rules(self, node, level, position=None):
        for rule in self.rules:
            if rule.level != level or rule.rewriter is None:
                continue
            if rule.scope == "value" and position not in (None, VALUE):
                continue
            if rule.matcher(node):
                self.fired.append(rule.id)
                return rule.rewriter(node, self.ctx)
        return node

    # -- statements ---------------------------------------------------------

    def stmt(self, stmt):
        if isinstance(stmt, SetOp):
            return SetOp(stmt.op, self.stmt(stmt.left), self.stmt(stmt.right))
        if isinstance(stmt, Select):
            return self.select(stmt)
        return stmt

    def select(self, sel: Select):
        projections = tuple(
            SelectItem(self.expr(i.expr, VALUE), i.alias) for i in sel.projections
        )
        from_items = tuple(self.from_item(f) for f in sel.from_items)
        where = self.expr(sel.where, TRUTH) if sel.where is not None else None
        group_by = tuple(self.expr(g, SORT) for g in sel.group_by)
        order_by = tuple(OrderItem(self.expr(o.expr, SORT), o.desc) for o in sel.order_by)
        out = Select(
            projections=projections,
            from_items=from_items,
            where=where,
            group_by=group_by,
            sample_by=sel.sample_by,
            latest_on=sel.latest_on,
            order_by=order_by,
            limit=sel.limit,
            distinct=sel.distinct,
        )
        result = self._apply_rules(out, "select")
        return result

    def from_item(self, fi):
        if isinstance(fi, Join):
            left = self.from_item(fi.left)
            right = self.from_item(fi.right)
            on = self.expr(fi.on, TRUTH) if fi.on is not None else None
            return Join(fi.kind, left, right, on)
        if isinstance(fi, SubquerySource):
            return SubquerySource(self.stmt(fi.query), fi.alias)
        if isinstance(fi, WindowTable):
            return self._apply_rules(fi, "from")
        return fi

    # -- expressions --------------------------------------------------------

    def expr(self, e, position):
        if e is None or isinstance(e, (Literal, ColumnRef, Star, Interval)):
            return e
        if isinstance(e, Comparison):
            out = Comparison(
                e.op, self.expr(e.left, SCALAR), self.expr(e.right, SCALAR), e.null_guarded
            )
        elif isinstance(e, InList):
            out = InList(
                self.expr(e.expr, SCALAR),
                tuple(self.expr(i, SCALAR) for i in e.items),
                e.null_guarded,
            )
        elif isinstance(e, TimestampIn):
            out = TimestampIn(self.expr(e.expr, SCALAR), e.spec)
        elif isinstance(e, Between):
            out = Between(
                self.expr(e.expr, SCALAR),
                self.expr(e.low, SCALAR),
                self.expr(e.high, SCALAR),
                e.symmetric,
                e.null_guarded,
            )
        elif isinstance(e, IsNull):
            out = IsNull(self.expr(e.expr, SCALAR), e.negated)
        elif isinstance(e, CaseWhen):
            whens = tuple(
                (self.expr(cond, TRUTH), self.expr(result, position))
                for cond, result in e.whens
            )
            else_ = self.expr(e.else_, position) if e.else_ is not None else None
            out = CaseWhen(whens, else_)
        elif isinstance(e, FuncCall):
            out = FuncCall(
                e.name, tuple(self.expr(a, SCALAR) for a in e.args), e.distinct, e.star
            )
        elif isinstance(e, Extract):
            out = Extract(e.unit, self.expr(e.expr, SCALAR))
        elif isinstance(e, Cast):
            out = Cast(self.expr(e.expr, SCALAR), e.dtype)
        elif isinstance(e, WindowFunc):
            out = WindowFunc(
                self.expr(e.func, SCALAR),
                tuple(self.expr(p, SORT) for p in e.partition_by),
                tuple(OrderItem(self.expr(o.expr, SORT), o.desc) for o in e.order_by),
            )
        elif isinstance(e, BoolOp):
            out = BoolOp(e.op, self.expr(e.left, position), self.expr(e.right, position))
        elif isinstance(e, Not):
            out = Not(self.expr(e.expr, position))
        elif isinstance(e, Arith):
            out = Arith(e.op, self.expr(e.left, SCALAR), self.expr(e.right, SCALAR))
        elif isinstance(e, SubqueryExpr):
            out = SubqueryExpr(self.stmt(e.query))
        else:
            raise TypeError(f"cannot walk {type(e).__name__}")
        return self._apply_rules(out, "expr", position)
