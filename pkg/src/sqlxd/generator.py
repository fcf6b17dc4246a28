"""Seeded random generation of schemas, row data, and queries drawn from
the effective clause pool.

Randomness comes from SplitMix64, a named fixed-algorithm generator, so a
(seed, config) pair reproduces the exact corpus on any platform; the
platform RNG is never used. Literal values are boundary-biased: NULL,
zero, plus/minus one, integer extrema, epoch-adjacent timestamps, and
short strings including the empty string, because result divergences
concentrate around NULL and boundary semantics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .render import render
from .sqlast import (
    Arith,
    Between,
    BoolOp,
    CaseWhen,
    ColumnDef,
    ColumnRef,
    Comparison,
    CreateTable,
    FuncCall,
    Insert,
    Interval,
    InList,
    IsNull,
    Join,
    LatestOn,
    Literal,
    Not,
    OrderItem,
    SampleBy,
    Select,
    SelectItem,
    SetOp,
    SubqueryExpr,
    SubquerySource,
    TableRef,
    TimestampIn,
    WindowFunc,
    WindowTable,
    Dialect,
    KIND_STREAMING,
    KIND_TIME_SERIES,
    STAR,
    T_BIGINT,
    T_BOOLEAN,
    T_FLOAT,
    T_INTEGER,
    T_STRING,
    T_SYMBOL,
    T_TIMESTAMP,
    BIGINT,
    BOOLEAN,
    FLOAT,
    INTEGER,
    STRING,
    SYMBOL,
    TIMESTAMP,
)


class SplitMix64:
    """SplitMix64 PRNG (Steele, Lea, Flood 2014): 64-bit state, fixed
    constants, trivially portable."""

    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def randint(self, low: int, high: int) -> int:
        """Uniform in [low, high]; modulo bias is negligible at 64 bits."""
        if high < low:
            raise ValueError("empty range")
        return low + self.next_u64() % (high - low + 1)

    def random(self) -> float:
        return (self.next_u64() >> 11) / float(1 << 53)

    def chance(self, p: float) -> bool:
        return self.random() < p

    def choice(self, seq):
        if not seq:
            raise ValueError("empty sequence")
        return seq[self.next_u64() % len(seq)]


DEFAULT_ROW_RANGE = (50, 500)


@dataclass(frozen=True)
class GenConfig:
    seed: int = 1
    table_count: int = 3
    max_columns: int = 8
    row_range: tuple = DEFAULT_ROW_RANGE
    null_probability: float = 0.05
    feature_toggles: tuple = ()  # ((clause_id, bool), ...); absent means on
    max_subquery_depth: int = 2
    max_setop_branches: int = 3
    table_prefix: str = ""

    def __post_init__(self):
        if not 1 <= self.max_columns <= 8:
            raise ValueError("max_columns must stay within [1, 8]")
        low, high = self.row_range
        if not (0 <= low <= high):
            raise ValueError("row_range must be a non-empty [min, max]")
        if not 0.0 <= self.null_probability <= 1.0:
            raise ValueError("null_probability must be a fraction")

    def toggles(self) -> dict:
        return dict(self.feature_toggles)

    def enabled(self, clause_id: str) -> bool:
        return self.toggles().get(clause_id, True)


@dataclass(frozen=True)
class SchemaSpec:
    tables: tuple  # CreateTable statements

    def table(self, name: str) -> CreateTable:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)


_COLUMN_TYPE_POOL = (T_INTEGER, T_BIGINT, T_FLOAT, T_BOOLEAN, T_STRING)

_EPOCH_2023 = 1_672_531_200_000_000  # 2023-01-01T00:00:00Z in micros

_INT_POOL = (0, 1, -1, 2**31 - 1, -(2**31), 7, 42, -100)
_BIGINT_POOL = (0, 1, -1, 2**63 - 1, -(2**63) + 1, 946_702_800_000)
_FLOAT_POOL = (0.0, 1.0, -1.0, 1.5, -2.5, 0.001, 1e9, -3.25)
_STRING_POOL = ("", "a", "A", "Z", "abc", "zz", "b c", "0")


def gen_schema(cfg: GenConfig, dialect: Dialect) -> SchemaSpec:
    """table-count tables; time-series tables carry exactly one designated
    timestamp column; deterministic per seed."""
    rng = SplitMix64(cfg.seed ^ 0x5C4E_11A9)
    use_symbol = dialect.kind == KIND_TIME_SERIES and cfg.enabled("symbol_type")
    tables = []
    for i in range(cfg.table_count):
        name = f"{cfg.table_prefix}t{i}"
        ncols = rng.randint(1, cfg.max_columns)
        columns = [ColumnDef("ts", T_TIMESTAMP)]
        type_pool = _COLUMN_TYPE_POOL + ((T_SYMBOL,) if use_symbol else ())
        for j in range(ncols - 1):
            columns.append(ColumnDef(f"c{j}", rng.choice(type_pool)))
        designated = "ts" if dialect.kind == KIND_TIME_SERIES else None
        tables.append(CreateTable(name, tuple(columns), designated))
    return SchemaSpec(tuple(tables))


def gen_data(schema: SchemaSpec, cfg: GenConfig) -> list:
    """Per-row INSERT statements; timestamps are monotone non-decreasing per
    table and NULLs appear with the configured probability in nullable
    columns (booleans and the designated timestamp are non-nullable)."""
    rng = SplitMix64(cfg.seed ^ 0xD474_BA5E)
    statements = []
    low, high = cfg.row_range
    for table in schema.tables:
        nrows = rng.randint(low, high) if high > 0 else 0
        ts_value = _EPOCH_2023 + rng.randint(0, 86_400) * 1_000_000
        for _ in range(nrows):
            values = []
            for col in table.columns:
                if col.name == table.designated_ts or (
                    col.dtype.variant == TIMESTAMP and table.designated_ts is None and col.name == "ts"
                ):
                    ts_value += rng.randint(0, 3_600) * 1_000_000
                    values.append(Literal(ts_value, T_TIMESTAMP))
                    continue
                values.append(_literal_for(col.dtype.variant, rng, cfg.null_probability))
            statements.append(Insert(table.name, (tuple(values),)))
    return statements


def _literal_for(variant: str, rng: SplitMix64, null_probability: float) -> Literal:
    nullable = variant not in (BOOLEAN,)
    if nullable and rng.chance(null_probability):
        return Literal(None, DataTypeByVariant[variant])
    if variant == INTEGER:
        return _int_literal(rng.choice(_INT_POOL))
    if variant == BIGINT:
        return _int_literal(rng.choice(_BIGINT_POOL))
    if variant == FLOAT:
        return Literal(rng.choice(_FLOAT_POOL), T_FLOAT)
    if variant == BOOLEAN:
        return Literal(rng.chance(0.5), T_BOOLEAN)
    if variant == STRING:
        return Literal(rng.choice(_STRING_POOL), T_STRING)
    if variant == SYMBOL:
        # symbol columns take plain string literals; the quoted form is the
        # canonical string literal either way
        return Literal(rng.choice(_STRING_POOL[1:]), T_STRING)
    if variant == TIMESTAMP:
        return Literal(_EPOCH_2023 + rng.randint(0, 10**6) * 1_000_000, T_TIMESTAMP)
    raise ValueError(variant)


DataTypeByVariant = {
    INTEGER: T_INTEGER,
    BIGINT: T_BIGINT,
    FLOAT: T_FLOAT,
    BOOLEAN: T_BOOLEAN,
    STRING: T_STRING,
    SYMBOL: T_SYMBOL,
    TIMESTAMP: T_TIMESTAMP,
}


def _int_literal(value: int) -> Literal:
    # literal type follows magnitude, matching the parser's canonical rule
    if -(2**31) <= value <= 2**31 - 1:
        return Literal(value, T_INTEGER)
    return Literal(value, T_BIGINT)

_NUMERIC = (INTEGER, BIGINT, FLOAT)
_TEXT = (STRING, SYMBOL)


def _comparable(a: str, b: str) -> bool:
    if a in _NUMERIC and b in _NUMERIC:
        return True
    if a in _TEXT and b in _TEXT:
        return True
    return a == b


class QueryGenerator:
    """Draws queries from the effective pool for one (schema, config) pair.

    One instance per worker; derive per-worker seeds as seed XOR worker
    index. Instances share nothing.
    """

    def __init__(self, schema: SchemaSpec, pool, cfg: GenConfig, dialect: Dialect):
        self.schema = schema
        self.pool = pool
        self.cfg = cfg
        self.dialect = dialect
        self.rng = SplitMix64(cfg.seed ^ 0x9E37_79B9)
        self._effective = pool.effective() if hasattr(pool, "effective") else frozenset(pool)

    def uses(self, clause_id: str) -> bool:
        return clause_id in self._effective and self.cfg.enabled(clause_id)

    # -- entry point ---------------------------------------------------------

    def query(self):
        shapes = [("simple", 50)]
        if self.uses("union") or self.uses("union_all") or self.uses("except") or self.uses("intersect"):
            shapes.append(("setop", 18))
        if self.uses("sample_by") and self.dialect.kind == KIND_TIME_SERIES:
            shapes.append(("sample_by", 9))
        if self.uses("latest_on") and self.dialect.kind == KIND_TIME_SERIES and self._latest_candidates():
            shapes.append(("latest_on", 8))
        if self.uses("timestamp_in") and self.dialect.kind == KIND_TIME_SERIES:
            shapes.append(("timestamp_in", 6))
        if (self.uses("tumble") or self.uses("hop")) and self.dialect.kind == KIND_STREAMING:
            shapes.append(("window_table", 9))
        total = sum(w for _, w in shapes)
        pick = self.rng.randint(1, total)
        for shape, weight in shapes:
            pick -= weight
            if pick <= 0:
                return getattr(self, f"_gen_{shape}")()
        return self._gen_simple()

    # -- shapes ---------------------------------------------------------------

    def _gen_simple(self, depth: int = 0):
        from_items, scopes = self._gen_from(depth)
        aggregate = self.uses("count") and self.rng.chance(0.35)
        if aggregate:
            projections, group_by = self._agg_projections(scopes)
        else:
            projections = self._value_projections(scopes)
            group_by = ()
        where = self._maybe_where(scopes, depth)
        order_by = ()
        if self.uses("order_by") and self.rng.chance(0.22) and not aggregate:
            col = self._any_column(scopes)
            if col is not None:
                order_by = (OrderItem(col, self.rng.chance(0.4)),)
        limit = self.rng.randint(1, 100) if self.uses("limit") and self.rng.chance(0.18) else None
        distinct = self.uses("distinct") and self.rng.chance(0.12) and not aggregate
        return Select(
            projections=projections,
            from_items=from_items,
            where=where,
            group_by=group_by,
            order_by=order_by,
            limit=limit,
            distinct=distinct,
        )

    def _gen_setop(self):
        ops = [op for op in ("union", "union_all", "except", "intersect") if self.uses(op)]
        branches = self.rng.randint(2, max(2, self.cfg.max_setop_branches))
        arity = 1 if self.rng.chance(0.8) else 2
        current = self._setop_branch(arity)
        for _ in range(branches - 1):
            op = self.rng.choice(ops).replace("union_all", "union-all")
            current = SetOp(op, current, self._setop_branch(arity))
        return current

    def _setop_branch(self, arity: int) -> Select:
        if not self.uses("count") or self.rng.chance(0.5):
            items = tuple(
                SelectItem(Literal(self.rng.randint(0, 3), T_INTEGER)) for _ in range(arity)
            )
            return Select(projections=items)
        table = self.rng.choice(self.schema.tables)
        scope = [(None, table)]
        items = [SelectItem(FuncCall("count", star=True))]
        agg_names = tuple(n for n in ("min", "max") if self.uses(n))
        for _ in range(arity - 1):
            col = self._column_of(scope, _NUMERIC)
            items.append(
                SelectItem(FuncCall(self.rng.choice(agg_names), (col,)))
                if col is not None and agg_names
                else SelectItem(FuncCall("count", star=True))
            )
        return Select(
            projections=tuple(items),
            from_items=(TableRef(table.name),),
            where=self._maybe_where(scope, self.cfg.max_subquery_depth),
        )

    def _gen_sample_by(self):
        table = self.rng.choice(self.schema.tables)
        scope = [(None, table)]
        aggs = [SelectItem(FuncCall("count", star=True))]
        col = self._column_of(scope, _NUMERIC)
        agg_names = tuple(n for n in ("min", "max", "avg") if self.uses(n))
        if col is not None and agg_names and self.rng.chance(0.5):
            aggs.append(SelectItem(FuncCall(self.rng.choice(agg_names), (col,))))
        interval = self.rng.choice(("1h", "1d"))
        return Select(
            projections=tuple(aggs),
            from_items=(TableRef(table.name),),
            where=self._maybe_where(scope, self.cfg.max_subquery_depth, p=0.3),
            sample_by=SampleBy(interval),
        )

    def _latest_candidates(self):
        return [
            t for t in self.schema.tables
            if t.designated_ts and any(
                c.dtype.variant in (INTEGER, STRING, SYMBOL) for c in t.columns
                if c.name != t.designated_ts
            )
        ]

    def _gen_latest_on(self):
        table = self.rng.choice(self._latest_candidates())
        keys = [
            c for c in table.columns
            if c.name != table.designated_ts and c.dtype.variant in (INTEGER, STRING, SYMBOL)
        ]
        key = self.rng.choice(keys)
        return Select(
            projections=(SelectItem(STAR),),
            from_items=(TableRef(table.name),),
            latest_on=LatestOn(ColumnRef(table.designated_ts), (ColumnRef(key.name),)),
        )

    def _gen_timestamp_in(self):
        table = self.rng.choice(self.schema.tables)
        spec = self.rng.choice(("2023", "2023-01", "2023-01;-3d", "2023-02;5d"))
        return Select(
            projections=(SelectItem(FuncCall("count", star=True)),),
            from_items=(TableRef(table.name),),
            where=TimestampIn(ColumnRef("ts"), spec),
        )

    def _gen_window_table(self):
        kinds = [k for k in ("tumble", "hop") if self.uses(k)]
        kind = self.rng.choice(kinds)
        table = self.rng.choice(self.schema.tables)
        slide = Interval(self.rng.choice(("1 day", "1 hour")))
        size = Interval(self.rng.choice(("2 days", "3 hours"))) if kind == "hop" else None
        return Select(
            projections=(SelectItem(STAR),),
            from_items=(WindowTable(kind, TableRef(table.name), ColumnRef("ts"), slide, size),),
        )

    # -- FROM construction ----------------------------------------------------

    def _gen_from(self, depth: int):
        """Returns (from_items, scopes); a scope is (alias, CreateTable)."""
        roll = self.rng.random()
        if roll < 0.18 and self.uses("subquery") and depth < self.cfg.max_subquery_depth:
            return self._gen_subquery_source(depth)
        if roll < 0.40 and (self.uses("inner_join") or self.uses("cross_join")) and len(self.schema.tables) >= 1:
            a = self.rng.choice(self.schema.tables)
            b = self.rng.choice(self.schema.tables)
            left = TableRef(a.name, "j1")
            right = TableRef(b.name, "j2")
            scopes = [("j1", a), ("j2", b)]
            cross = self.uses("cross_join") and (not self.uses("inner_join") or self.rng.chance(0.4))
            if cross:
                return (Join("cross", left, right),), scopes
            on = self._join_condition(a, b)
            if on is not None:
                return (Join("inner", left, right, on),), scopes
            return (Join("cross", left, right),), scopes
        table = self.rng.choice(self.schema.tables)
        return (TableRef(table.name),), [(None, table)]

    def _gen_subquery_source(self, depth: int):
        """Table replaced by a column-projection subquery; projected columns
        keep their declared types so outer predicates stay type-correct."""
        table = self.rng.choice(self.schema.tables)
        count = self.rng.randint(1, min(3, len(table.columns)))
        start = self.rng.randint(0, len(table.columns) - count)
        picked = table.columns[start:start + count]
        scope_inner = [(None, table)]
        inner = Select(
            projections=tuple(SelectItem(ColumnRef(c.name)) for c in picked),
            from_items=(TableRef(table.name),),
            where=self._maybe_where(scope_inner, depth + 1, p=0.4),
        )
        alias = f"sq{depth}"
        return (SubquerySource(inner, alias),), [(alias, tuple(picked))]

    def _join_condition(self, a: CreateTable, b: CreateTable):
        pairs = []
        for ca in a.columns:
            for cb in b.columns:
                if _comparable(ca.dtype.variant, cb.dtype.variant):
                    pairs.append((ca, cb))
        if not pairs:
            return None
        ca, cb = self.rng.choice(pairs)
        return Comparison("=", ColumnRef(ca.name, "j1"), ColumnRef(cb.name, "j2"))

    # -- projections ------------------------------------------------------------

    def _value_projections(self, scopes):
        count = self.rng.randint(1, 3)
        items = []
        for _ in range(count):
            items.append(SelectItem(self._value_expr(scopes)))
        return tuple(items)

    def _value_expr(self, scopes):
        roll = self.rng.random()
        col = self._any_column(scopes)
        if col is None or roll < 0.15:
            return Literal(self.rng.choice(_INT_POOL[:4]), T_INTEGER)
        if roll < 0.45:
            return col
        if roll < 0.70:
            return self._predicate(scopes, for_value=True)
        if roll < 0.80 and self.uses("case_when"):
            cond = self._predicate(scopes)
            return CaseWhen(((cond, Literal(1, T_INTEGER)),), Literal(0, T_INTEGER))
        if roll < 0.90 and self.uses("window_function"):
            num = self._column_of(scopes, _NUMERIC)
            part = self._any_column(scopes)
            if num is not None and part is not None:
                return WindowFunc(FuncCall("avg", (num,)), (part,))
            return col
        num = self._column_of(scopes, _NUMERIC)
        if num is not None:
            return Arith("+", num, Literal(1, T_INTEGER))
        return col

    def _agg_projections(self, scopes):
        items = [SelectItem(FuncCall("count", star=True))]
        num = self._column_of(scopes, _NUMERIC)
        agg_names = tuple(n for n in ("avg", "min", "max") if self.uses(n))
        if num is not None and agg_names and self.rng.chance(0.6):
            items.append(SelectItem(FuncCall(self.rng.choice(agg_names), (num,))))
        if self.uses("count_distinct") and self.rng.chance(0.35):
            col = self._any_column(scopes)
            if col is not None:
                items.append(SelectItem(FuncCall("count_distinct", (col,))))
        group_by = ()
        if self.uses("group_by") and self.rng.chance(0.4):
            col = self._column_of(scopes, (INTEGER, STRING, SYMBOL, BOOLEAN))
            if col is not None:
                group_by = (col,)
                items.insert(0, SelectItem(col))
        return tuple(items), group_by

    # -- predicates ---------------------------------------------------------------

    def _maybe_where(self, scopes, depth, p: float = 0.55):
        if not self.uses("where") or not self.rng.chance(p):
            return None
        return self._predicate(scopes, depth=depth, allow_bool_ops=True)

    def _predicate(self, scopes, depth: int = 99, for_value: bool = False, allow_bool_ops: bool = False):
        if allow_bool_ops and self.rng.chance(0.3):
            left = self._predicate(scopes, depth, for_value)
            right = self._predicate(scopes, depth, for_value)
            combined = BoolOp(self.rng.choice(("and", "or")), left, right)
            return Not(combined) if self.rng.chance(0.15) else combined
        choices = ["comparison"]
        if self.uses("in_list"):
            choices.append("in_list")
        if self.uses("between"):
            choices.append("between")
        if self.uses("is_null"):
            choices.append("is_null")
        if (
            not for_value
            and self.uses("scalar_subquery")
            and (self.uses("min") or self.uses("max"))
            and depth < self.cfg.max_subquery_depth
            and self.rng.chance(0.5)
        ):
            choices.append("scalar_subquery")
        kind = self.rng.choice(choices)
        if kind == "is_null":
            col = self._any_column(scopes)
            if col is None:
                return Literal(True, T_BOOLEAN)
            return IsNull(col, self.rng.chance(0.3))
        if kind == "in_list":
            col = self._column_of(scopes, (INTEGER, STRING, SYMBOL))
            if col is None:
                return Literal(True, T_BOOLEAN)
            variant = self._variant_of(scopes, col)
            size = self.rng.randint(1, 3)
            items = tuple(
                _pool_literal(variant, self.rng, allow_null=for_value)
                for _ in range(size)
            )
            return InList(col, items)
        if kind == "between":
            col = self._column_of(scopes, _NUMERIC + (TIMESTAMP,))
            if col is None:
                return Literal(True, T_BOOLEAN)
            variant = self._variant_of(scopes, col)
            low = _pool_literal(variant, self.rng)
            high = _pool_literal(variant, self.rng)
            return Between(col, low, high)
        if kind == "scalar_subquery":
            col = self._column_of(scopes, _NUMERIC)
            table = self.rng.choice(self.schema.tables)
            inner_col = None
            for c in table.columns:
                if c.dtype.variant in _NUMERIC:
                    inner_col = ColumnRef(c.name)
                    break
            if col is None or inner_col is None:
                return Literal(True, T_BOOLEAN)
            inner_names = tuple(n for n in ("min", "max") if self.uses(n))
            inner = Select(
                projections=(SelectItem(FuncCall(self.rng.choice(inner_names), (inner_col,))),),
                from_items=(TableRef(table.name),),
            )
            return Comparison(self.rng.choice(("<", ">=")), col, SubqueryExpr(inner))
        col = self._any_column(scopes)
        if col is None:
            return Literal(True, T_BOOLEAN)
        variant = self._variant_of(scopes, col)
        op = self.rng.choice(("=", "!=", "<", "<=", ">", ">=")) if variant not in (BOOLEAN,) else "="
        other = _pool_literal(variant, self.rng, allow_null=for_value)
        return Comparison(op, col, other)

    # -- scope helpers ---------------------------------------------------------

    def _scope_columns(self, scopes):
        out = []
        for alias, table in scopes:
            columns = table.columns if isinstance(table, CreateTable) else table
            for col in columns:
                out.append((alias, col))
        return out

    def _any_column(self, scopes):
        cols = self._scope_columns(scopes)
        if not cols:
            return None
        alias, col = self.rng.choice(cols)
        return ColumnRef(col.name, alias)

    def _column_of(self, scopes, variants):
        cols = [(a, c) for a, c in self._scope_columns(scopes) if c.dtype.variant in variants]
        if not cols:
            return None
        alias, col = self.rng.choice(cols)
        return ColumnRef(col.name, alias)

    def _variant_of(self, scopes, ref: ColumnRef) -> str:
        for alias, table in scopes:
            if ref.table is not None and alias != ref.table:
                continue
            columns = table.columns if isinstance(table, CreateTable) else table
            for col in columns:
                if col.name == ref.name:
                    return col.dtype.variant
        return INTEGER


def _pool_literal(variant: str, rng: SplitMix64, allow_null: bool = False) -> Literal:
    if allow_null and rng.chance(0.2):
        return Literal(None, DataTypeByVariant.get(variant, T_INTEGER))
    if variant == INTEGER:
        return _int_literal(rng.choice((-1, 0, 1, 2, 42)))
    if variant == BIGINT:
        return _int_literal(rng.choice((0, 1, -1, 946_702_800_000)))
    if variant == FLOAT:
        return Literal(rng.choice((0.0, 1.0, -1.5, 2.5)), T_FLOAT)
    if variant == BOOLEAN:
        return Literal(rng.chance(0.5), T_BOOLEAN)
    if variant in (STRING, SYMBOL):
        return Literal(rng.choice(("", "a", "A", "Z", "zz")), T_STRING)
    if variant == TIMESTAMP:
        return Literal(_EPOCH_2023 + rng.randint(0, 10**6) * 1_000_000, T_TIMESTAMP)
    return Literal(0, T_INTEGER)


# ---------------------------------------------------------------------------
# Corpus dump
# ---------------------------------------------------------------------------


def gen_query(schema: SchemaSpec, pool, cfg: GenConfig, dialect: Dialect):
    """Single-query convenience entry; campaign loops use QueryGenerator."""
    return QueryGenerator(schema, pool, cfg, dialect).query()


def generate_corpus(schema: SchemaSpec, pool, cfg: GenConfig, dialect: Dialect, count: int) -> list:
    gen = QueryGenerator(schema, pool, cfg, dialect)
    return [gen.query() for _ in range(count)]


def write_corpus(path, statements, cfg: GenConfig, dialect: Dialect):
    """One statement per line plus a sidecar manifest for replay."""
    with open(path, "w", encoding="utf-8") as fh:
        for stmt in statements:
            fh.write(render(stmt, dialect) + "\n")
    manifest = {
        "seed": cfg.seed,
        "config": {
            "table_count": cfg.table_count,
            "max_columns": cfg.max_columns,
            "row_range": list(cfg.row_range),
            "null_probability": cfg.null_probability,
            "max_subquery_depth": cfg.max_subquery_depth,
            "max_setop_branches": cfg.max_setop_branches,
            "feature_toggles": dict(cfg.feature_toggles),
        },
        "dialect": dialect.name,
        "count": len(statements),
    }
    with open(str(path) + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
