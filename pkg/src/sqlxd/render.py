"""Deterministic SQL text rendering.

Canonical form: keywords uppercase, identifiers lowercase, single-space
separation, timestamp literals as ISO-8601 with microseconds. Rendering is
a pure function of (statement, dialect); equal inputs give equal text.
"""

from __future__ import annotations

import datetime

from .errors import UnsupportedConstruct
from .sqlast import (
    Arith,
    Between,
    BoolOp,
    CaseWhen,
    Cast,
    ColumnRef,
    Comparison,
    CreateTable,
    Dialect,
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
    BOOLEAN,
    FLOAT,
    STRING,
    SYMBOL,
    TIMESTAMP,
    construct_supported,
)

_EPOCH = datetime.datetime(1970, 1, 1)

# precedence levels, higher binds tighter
_P_OR = 1
_P_AND = 2
_P_NOT = 3
_P_CMP = 4
_P_ADD = 5
_P_MUL = 6
_P_PRIMARY = 9


def _prec(node) -> int:
    if isinstance(node, BoolOp):
        return _P_OR if node.op == "or" else _P_AND
    if isinstance(node, Not):
        return _P_NOT
    if isinstance(node, (Comparison, InList, Between, IsNull, TimestampIn)):
        return _P_CMP
    if isinstance(node, Arith):
        return _P_ADD if node.op in ("+", "-") else _P_MUL
    return _P_PRIMARY


def timestamp_text(micros: int) -> str:
    dt = _EPOCH + datetime.timedelta(microseconds=micros)
    return f"{dt:%Y-%m-%dT%H:%M:%S}.{dt.microsecond:06d}"


def render(stmt, dialect: Dialect) -> str:
    """Render a statement for a dialect; raises UnsupportedConstruct for
    dialect-only nodes the dialect lacks."""
    r = _Renderer(dialect)
    return r.statement(stmt)


def render_expr(expr, dialect: Dialect) -> str:
    return _Renderer(dialect).expr(expr)


class _Renderer:
    def __init__(self, dialect: Dialect):
        self.dialect = dialect

    def _require(self, tag: str):
        if not construct_supported(tag, self.dialect):
            raise UnsupportedConstruct(self.dialect.name, tag)

    # -- statements --------------------------------------------------------

    def statement(self, stmt) -> str:
        if isinstance(stmt, Select):
            return self.select(stmt)
        if isinstance(stmt, SetOp):
            return self.setop(stmt)
        if isinstance(stmt, CreateTable):
            return self.create_table(stmt)
        if isinstance(stmt, Insert):
            return self.insert(stmt)
        raise TypeError(f"cannot render {type(stmt).__name__}")

    def create_table(self, stmt: CreateTable) -> str:
        cols = []
        for col in stmt.columns:
            if col.dtype.variant == SYMBOL:
                self._require("symbol")
            keyword = self.dialect.keyword_for(col.dtype)
            if keyword is None:
                raise UnsupportedConstruct(self.dialect.name, f"type:{col.dtype.variant}")
            cols.append(f"{col.name} {keyword}")
        text = f"CREATE TABLE {stmt.name} ({', '.join(cols)})"
        if stmt.designated_ts is not None:
            self._require("designated-timestamp")
            text += f" TIMESTAMP({stmt.designated_ts})"
        return text

    def insert(self, stmt: Insert) -> str:
        rows = ", ".join(
            "(" + ", ".join(self.expr(v) for v in row) + ")" for row in stmt.rows
        )
        return f"INSERT INTO {stmt.table} VALUES {rows}"

    def setop(self, stmt: SetOp) -> str:
        op = {"union": "UNION", "union-all": "UNION ALL",
              "except": "EXCEPT", "intersect": "INTERSECT"}[stmt.op]
        return f"({self.statement(stmt.left)}) {op} ({self.statement(stmt.right)})"

    def select(self, stmt: Select) -> str:
        parts = ["SELECT"]
        if stmt.distinct:
            parts.append("DISTINCT")
        parts.append(", ".join(self.select_item(i) for i in stmt.projections))
        if stmt.from_items:
            parts.append("FROM")
            parts.append(", ".join(self.from_item(f) for f in stmt.from_items))
        if stmt.latest_on is not None:
            self._require("latest-on")
            lo = stmt.latest_on
            keys = ", ".join(self.expr(k) for k in lo.partition_keys)
            parts.append(f"LATEST ON {self.expr(lo.ts_col)} PARTITION BY {keys}")
        if stmt.where is not None:
            parts.append(f"WHERE {self.expr(stmt.where)}")
        if stmt.group_by:
            parts.append("GROUP BY " + ", ".join(self.expr(g) for g in stmt.group_by))
        if stmt.sample_by is not None:
            self._require("sample-by")
            parts.append(f"SAMPLE BY {stmt.sample_by.interval}")
            if stmt.sample_by.fill is not None:
                parts.append(f"FILL({stmt.sample_by.fill.upper()})")
        if stmt.order_by:
            parts.append("ORDER BY " + ", ".join(self.order_item(o) for o in stmt.order_by))
        if stmt.limit is not None:
            parts.append(f"LIMIT {stmt.limit}")
        return " ".join(parts)

    def select_item(self, item: SelectItem) -> str:
        text = self.expr(item.expr)
        if item.alias is not None:
            text += f" AS {item.alias}"
        return text

    def order_item(self, item: OrderItem) -> str:
        text = self.expr(item.expr)
        if item.desc:
            text += " DESC"
        return text

    def from_item(self, fi) -> str:
        if isinstance(fi, TableRef):
            if fi.alias is not None:
                return f"{fi.name} AS {fi.alias}"
            return fi.name
        if isinstance(fi, SubquerySource):
            return f"({self.statement(fi.query)}) AS {fi.alias}"
        if isinstance(fi, Join):
            # join trees are left-associative; right-nested joins are outside
            # the grammar subset
            if isinstance(fi.right, Join):
                raise TypeError("right-nested join trees are not part of the subset")
            left = self.from_item(fi.left)
            right = self.from_item(fi.right)
            if fi.kind == "cross":
                return f"{left} CROSS JOIN {right}"
            kw = "JOIN" if fi.kind == "inner" else "LEFT JOIN"
            return f"{left} {kw} {right} ON {self.expr(fi.on)}"
        if isinstance(fi, WindowTable):
            self._require(fi.kind)
            args = [self.from_item(fi.table), self.expr(fi.ts_col), self.expr(fi.slide)]
            if fi.size is not None:
                args.append(self.expr(fi.size))
            text = f"{fi.kind}({', '.join(args)})"
            if fi.alias is not None:
                text += f" AS {fi.alias}"
            return text
        raise TypeError(f"cannot render from-item {type(fi).__name__}")

    # -- expressions -------------------------------------------------------

    def expr(self, e) -> str:
        if isinstance(e, Star):
            return "*"
        if isinstance(e, ColumnRef):
            return f"{e.table}.{e.name}" if e.table else e.name
        if isinstance(e, Literal):
            return self.literal(e)
        if isinstance(e, Interval):
            return f"INTERVAL '{e.text}'"
        if isinstance(e, Comparison):
            return (f"{self._sub(e.left, _P_CMP, wrap_equal=True)} {e.op} "
                    f"{self._sub(e.right, _P_CMP, wrap_equal=True)}")
        if isinstance(e, InList):
            items = ", ".join(self.expr(i) for i in e.items)
            return f"{self._sub(e.expr, _P_CMP, wrap_equal=True)} IN ({items})"
        if isinstance(e, TimestampIn):
            self._require("timestamp-in")
            return f"{self._sub(e.expr, _P_CMP, wrap_equal=True)} IN '{e.spec}'"
        if isinstance(e, Between):
            kw = "BETWEEN"
            if e.symmetric:
                self._require("symmetric-between")
                kw = "BETWEEN SYMMETRIC"
            return (f"{self._sub(e.expr, _P_CMP, wrap_equal=True)} {kw} "
                    f"{self._sub(e.low, _P_CMP, wrap_equal=True)} AND "
                    f"{self._sub(e.high, _P_CMP, wrap_equal=True)}")
        if isinstance(e, IsNull):
            kw = "IS NOT NULL" if e.negated else "IS NULL"
            return f"{self._sub(e.expr, _P_CMP, wrap_equal=True)} {kw}"
        if isinstance(e, CaseWhen):
            parts = ["CASE"]
            for cond, result in e.whens:
                parts.append(f"WHEN {self.expr(cond)} THEN {self.expr(result)}")
            if e.else_ is not None:
                parts.append(f"ELSE {self.expr(e.else_)}")
            parts.append("END")
            return " ".join(parts)
        if isinstance(e, FuncCall):
            if e.name in ("count_distinct", "dateadd", "datediff"):
                self._require(e.name)
            if e.star:
                return f"{e.name}(*)"
            args = ", ".join(self.expr(a) for a in e.args)
            if e.distinct:
                return f"{e.name}(DISTINCT {args})"
            return f"{e.name}({args})"
        if isinstance(e, Extract):
            return f"extract({e.unit.upper()} FROM {self.expr(e.expr)})"
        if isinstance(e, Cast):
            if e.dtype.variant == SYMBOL:
                self._require("symbol")
            keyword = self.dialect.keyword_for(e.dtype)
            if keyword is None:
                raise UnsupportedConstruct(self.dialect.name, f"type:{e.dtype.variant}")
            return f"cast({self.expr(e.expr)} AS {keyword})"
        if isinstance(e, WindowFunc):
            over = []
            if e.partition_by:
                over.append("PARTITION BY " + ", ".join(self.expr(p) for p in e.partition_by))
            if e.order_by:
                over.append("ORDER BY " + ", ".join(self.order_item(o) for o in e.order_by))
            return f"{self.expr(e.func)} OVER ({' '.join(over)})"
        if isinstance(e, BoolOp):
            level = _prec(e)
            left = self._sub(e.left, level)
            right = self._sub(e.right, level, wrap_equal=True)
            return f"{left} {e.op.upper()} {right}"
        if isinstance(e, Not):
            return f"NOT {self._sub(e.expr, _P_NOT)}"
        if isinstance(e, Arith):
            level = _prec(e)
            left = self._sub(e.left, level)
            right = self._sub(e.right, level, wrap_equal=True)
            return f"{left} {e.op} {right}"
        if isinstance(e, SubqueryExpr):
            return f"({self.statement(e.query)})"
        raise TypeError(f"cannot render expression {type(e).__name__}")

    def _sub(self, e, parent_level: int, wrap_equal: bool = False) -> str:
        level = _prec(e)
        text = self.expr(e)
        if level < parent_level or (wrap_equal and level == parent_level):
            return f"({text})"
        return text

    def literal(self, lit: Literal) -> str:
        v = lit.value
        if v is None:
            return "NULL"
        if lit.dtype.variant == BOOLEAN:
            return "TRUE" if v else "FALSE"
        if lit.dtype.variant == TIMESTAMP:
            return f"'{timestamp_text(v)}'"
        if lit.dtype.variant in (STRING, SYMBOL):
            escaped = str(v).replace("'", "''")
            return f"'{escaped}'"
        if lit.dtype.variant == FLOAT:
            if v != v or v in (float("inf"), float("-inf")):
                raise ValueError("non-finite float literal")
            return repr(float(v))
        return str(int(v))
