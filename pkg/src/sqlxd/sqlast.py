"""Typed SQL abstract syntax for the harness grammar subset.

The grammar is closed over what the workload generator can emit plus the
dialect constructs the mapping rules translate (time-bucket sampling,
latest-row selection, window tables, symbol columns, timestamp range
membership). Full SQL is deliberately out of scope.

All nodes are immutable after construction and safe to share between
workers. Identifiers are stored lowercase; string literal contents are
kept verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

# ---------------------------------------------------------------------------
# Data types and dialects
# ---------------------------------------------------------------------------

INTEGER = "integer"
BIGINT = "big-integer"
FLOAT = "float"
BOOLEAN = "boolean"
STRING = "string"
SYMBOL = "symbol"
TIMESTAMP = "timestamp"
SHORT = "short"

TYPE_VARIANTS = frozenset(
    {INTEGER, BIGINT, FLOAT, BOOLEAN, STRING, SYMBOL, TIMESTAMP, SHORT}
)


@dataclass(frozen=True)
class DataType:
    """Abstract column/literal type; `length` only applies to string types."""

    variant: str
    length: Optional[int] = None

    def __post_init__(self):
        if self.variant not in TYPE_VARIANTS:
            raise ValueError(f"unknown type variant {self.variant!r}")


T_INTEGER = DataType(INTEGER)
T_BIGINT = DataType(BIGINT)
T_FLOAT = DataType(FLOAT)
T_BOOLEAN = DataType(BOOLEAN)
T_STRING = DataType(STRING)
T_SYMBOL = DataType(SYMBOL)
T_TIMESTAMP = DataType(TIMESTAMP)
T_SHORT = DataType(SHORT)

KIND_REFERENCE = "reference-relational"
KIND_TIME_SERIES = "time-series"
KIND_STREAMING = "streaming"
KIND_CANONICAL = "canonical"  # internal superset used for digests


@dataclass(frozen=True)
class Dialect:
    """A rendering target: dialect kind, system name, and type keyword table.

    Every abstract data type has exactly one keyword per dialect; a missing
    entry means the type is dialect-only and rendering it is an error.
    """

    kind: str
    name: str
    type_keywords: tuple  # ((variant, keyword), ...) kept as a tuple for hashability

    def keyword_for(self, dtype: DataType) -> Optional[str]:
        for variant, keyword in self.type_keywords:
            if variant == dtype.variant:
                if dtype.variant == STRING and "(" not in keyword and keyword == "VARCHAR":
                    return f"VARCHAR({dtype.length or 128})"
                return keyword
        return None


QUESTDB = Dialect(
    kind=KIND_TIME_SERIES,
    name="questdb",
    type_keywords=(
        (INTEGER, "INT"),
        (BIGINT, "LONG"),
        (FLOAT, "DOUBLE"),
        (BOOLEAN, "BOOLEAN"),
        (STRING, "STRING"),
        (SYMBOL, "SYMBOL"),
        (TIMESTAMP, "TIMESTAMP"),
        (SHORT, "SHORT"),
    ),
)

# The short/float pairing mirrors the DDL pair the harness must reproduce for
# the bundled syntax-error regression case; smallint would lose that pair.
POSTGRESQL = Dialect(
    kind=KIND_REFERENCE,
    name="postgresql",
    type_keywords=(
        (INTEGER, "INT"),
        (BIGINT, "BIGINT"),
        (FLOAT, "FLOAT"),
        (BOOLEAN, "BOOLEAN"),
        (STRING, "VARCHAR"),
        (TIMESTAMP, "TIMESTAMP"),
        (SHORT, "FLOAT"),
    ),
)

RISINGWAVE = Dialect(
    kind=KIND_STREAMING,
    name="risingwave",
    type_keywords=(
        (INTEGER, "INT"),
        (BIGINT, "BIGINT"),
        (FLOAT, "DOUBLE"),
        (BOOLEAN, "BOOLEAN"),
        (STRING, "VARCHAR"),
        (TIMESTAMP, "TIMESTAMP"),
        (SHORT, "SMALLINT"),
    ),
)

# Internal superset dialect: renders every construct, used to canonicalize
# SQL text for digests. Never sent to a live system.
CANONICAL = Dialect(
    kind=KIND_CANONICAL,
    name="canonical",
    type_keywords=(
        (INTEGER, "INT"),
        (BIGINT, "BIGINT"),
        (FLOAT, "FLOAT"),
        (BOOLEAN, "BOOLEAN"),
        (STRING, "VARCHAR"),
        (SYMBOL, "SYMBOL"),
        (TIMESTAMP, "TIMESTAMP"),
        (SHORT, "SHORT"),
    ),
)

DIALECTS = {d.name: d for d in (QUESTDB, POSTGRESQL, RISINGWAVE, CANONICAL)}


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


class Expr:
    """Marker base class for expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class ColumnRef(Expr):
    name: str
    table: Optional[str] = None


@dataclass(frozen=True, eq=False)
class Literal(Expr):
    """Typed literal; value None is the NULL literal carrying its intended type.

    Two NULL literals compare equal regardless of intended type: the type is
    generator/evaluator metadata and the rendered form is always "NULL".
    Timestamp values are stored as integer epoch microseconds.
    """

    value: object
    dtype: DataType

    def __eq__(self, other):
        if not isinstance(other, Literal):
            return NotImplemented
        if self.value is None and other.value is None:
            return True
        # bool is an int subclass; keep TRUE distinct from 1
        if isinstance(self.value, bool) != isinstance(other.value, bool):
            return False
        return self.value == other.value and self.dtype == other.dtype

    def __hash__(self):
        if self.value is None:
            return hash(("literal", None))
        return hash(("literal", self.value, self.dtype))


def null(dtype: DataType = T_INTEGER) -> Literal:
    return Literal(None, dtype)


COMPARISON_OPS = ("=", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Comparison(Expr):
    op: str
    left: Expr
    right: Expr
    null_guarded: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class InList(Expr):
    """Membership test against a list of literals."""

    expr: Expr
    items: tuple
    null_guarded: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class TimestampIn(Expr):
    """Time-series range membership: ts IN '2023-01;-3d'. Dialect-only."""

    expr: Expr
    spec: str


@dataclass(frozen=True)
class Between(Expr):
    expr: Expr
    low: Expr
    high: Expr
    symmetric: bool = False
    null_guarded: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class IsNull(Expr):
    expr: Expr
    negated: bool = False


@dataclass(frozen=True)
class CaseWhen(Expr):
    whens: tuple  # ((condition, result), ...)
    else_: Optional[Expr] = None


@dataclass(frozen=True)
class FuncCall(Expr):
    """Function call; `star` covers count(*), `distinct` covers count(DISTINCT x)."""

    name: str
    args: tuple = ()
    distinct: bool = False
    star: bool = False


@dataclass(frozen=True)
class Extract(Expr):
    """extract(UNIT FROM expr); unit is a keyword, not an expression."""

    unit: str
    expr: Expr


@dataclass(frozen=True)
class Cast(Expr):
    expr: Expr
    dtype: DataType


@dataclass(frozen=True)
class WindowFunc(Expr):
    func: FuncCall
    partition_by: tuple = ()
    order_by: tuple = ()  # OrderItem


@dataclass(frozen=True)
class BoolOp(Expr):
    op: str  # "and" | "or"
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Not(Expr):
    expr: Expr


ARITH_OPS = ("+", "-", "*", "/")


@dataclass(frozen=True)
class Arith(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Interval(Expr):
    """INTERVAL '1 day' style literal used by window tables and date math."""

    text: str


@dataclass(frozen=True)
class SubqueryExpr(Expr):
    """Scalar subquery in expression position."""

    query: "SelectLike"


@dataclass(frozen=True)
class Star(Expr):
    pass


STAR = Star()


# ---------------------------------------------------------------------------
# Select machinery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SelectItem:
    expr: Expr
    alias: Optional[str] = None


@dataclass(frozen=True)
class OrderItem:
    expr: Expr
    desc: bool = False


class FromItem:
    __slots__ = ()


@dataclass(frozen=True)
class TableRef(FromItem):
    name: str
    alias: Optional[str] = None


@dataclass(frozen=True)
class SubquerySource(FromItem):
    query: "SelectLike"
    alias: str


JOIN_KINDS = ("inner", "left", "cross")


@dataclass(frozen=True)
class Join(FromItem):
    kind: str
    left: FromItem
    right: FromItem
    on: Optional[Expr] = None


@dataclass(frozen=True)
class WindowTable(FromItem):
    """tumble()/hop() table function over a source table. Dialect-only."""

    kind: str  # "tumble" | "hop"
    table: TableRef
    ts_col: ColumnRef
    slide: Interval  # for tumble this is the single window size
    size: Optional[Interval] = None  # hop only
    alias: Optional[str] = None


@dataclass(frozen=True)
class SampleBy:
    """Time-bucket sampling clause: interval token like 1h plus fill mode."""

    interval: str
    fill: Optional[str] = None


@dataclass(frozen=True)
class LatestOn:
    ts_col: ColumnRef
    partition_keys: tuple


@dataclass(frozen=True)
class Select:
    projections: tuple  # SelectItem
    from_items: tuple = ()  # FromItem
    where: Optional[Expr] = None
    group_by: tuple = ()
    sample_by: Optional[SampleBy] = None
    latest_on: Optional[LatestOn] = None
    order_by: tuple = ()  # OrderItem
    limit: Optional[int] = None
    distinct: bool = False


SETOP_KINDS = ("union", "union-all", "except", "intersect")


@dataclass(frozen=True)
class SetOp:
    op: str
    left: "SelectLike"
    right: "SelectLike"

    def __post_init__(self):
        arities = {_projection_arity(self.left), _projection_arity(self.right)}
        arities.discard(None)  # star projections have table-dependent arity
        if len(arities) > 1:
            raise ValueError("set-operation branches must share projection arity")

    def branches(self) -> tuple:
        """Flattened leaf selects, left to right."""
        out = []
        for side in (self.left, self.right):
            if isinstance(side, SetOp):
                out.extend(side.branches())
            else:
                out.append(side)
        return tuple(out)


def _projection_arity(side):
    if isinstance(side, SetOp):
        return _projection_arity(side.left)
    if any(isinstance(item.expr, Star) for item in side.projections):
        return None
    return len(side.projections)


SelectLike = Union[Select, SetOp]


# ---------------------------------------------------------------------------
# Statements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ColumnDef:
    name: str
    dtype: DataType


@dataclass(frozen=True)
class CreateTable:
    name: str
    columns: tuple  # ColumnDef
    designated_ts: Optional[str] = None  # column name, time-series only

    def column(self, name: str) -> Optional[ColumnDef]:
        for col in self.columns:
            if col.name == name:
                return col
        return None


@dataclass(frozen=True)
class Insert:
    table: str
    rows: tuple  # tuple of tuples of Expr


Statement = Union[Select, SetOp, CreateTable, Insert]


# ---------------------------------------------------------------------------
# Tree walking helpers
# ---------------------------------------------------------------------------


def child_exprs(node) -> tuple:
    """Immediate expression children of an AST node (any kind)."""
    if isinstance(node, Comparison):
        return (node.left, node.right)
    if isinstance(node, InList):
        return (node.expr, *node.items)
    if isinstance(node, TimestampIn):
        return (node.expr,)
    if isinstance(node, Between):
        return (node.expr, node.low, node.high)
    if isinstance(node, IsNull):
        return (node.expr,)
    if isinstance(node, CaseWhen):
        out = []
        for cond, result in node.whens:
            out.append(cond)
            out.append(result)
        if node.else_ is not None:
            out.append(node.else_)
        return tuple(out)
    if isinstance(node, FuncCall):
        return node.args
    if isinstance(node, (Extract, Cast, Not)):
        return (node.expr,)
    if isinstance(node, WindowFunc):
        return (node.func, *node.partition_by, *(o.expr for o in node.order_by))
    if isinstance(node, (BoolOp, Arith)):
        return (node.left, node.right)
    return ()


def iter_exprs(node):
    """Depth-first iteration over every expression in a statement or expr."""
    stack = []
    if isinstance(node, Expr):
        stack.append(node)
    elif isinstance(node, Select):
        stack.extend(item.expr for item in node.projections)
        for fi in node.from_items:
            stack.extend(_from_item_exprs(fi))
        if node.where is not None:
            stack.append(node.where)
        stack.extend(node.group_by)
        if node.latest_on is not None:
            stack.append(node.latest_on.ts_col)
            stack.extend(node.latest_on.partition_keys)
        stack.extend(o.expr for o in node.order_by)
    elif isinstance(node, SetOp):
        for branch in node.branches():
            stack.extend(iter_exprs(branch))
    elif isinstance(node, Insert):
        for row in node.rows:
            stack.extend(row)
    while stack:
        e = stack.pop()
        yield e
        if isinstance(e, SubqueryExpr):
            stack.extend(iter_exprs(e.query))
        else:
            stack.extend(child_exprs(e))


def _from_item_exprs(fi) -> list:
    if isinstance(fi, Join):
        out = list(_from_item_exprs(fi.left)) + list(_from_item_exprs(fi.right))
        if fi.on is not None:
            out.append(fi.on)
        return out
    if isinstance(fi, SubquerySource):
        return list(iter_exprs(fi.query))
    if isinstance(fi, WindowTable):
        return [fi.ts_col]
    return []


def iter_selects(stmt):
    """All Select nodes in a statement, including subqueries, outermost first."""
    if isinstance(stmt, Select):
        yield stmt
        for fi in stmt.from_items:
            yield from _from_item_selects(fi)
        for e in iter_exprs(stmt):
            if isinstance(e, SubqueryExpr):
                yield from iter_selects(e.query)
    elif isinstance(stmt, SetOp):
        for branch in stmt.branches():
            yield from iter_selects(branch)


def _from_item_selects(fi):
    if isinstance(fi, Join):
        yield from _from_item_selects(fi.left)
        yield from _from_item_selects(fi.right)
    elif isinstance(fi, SubquerySource):
        yield from iter_selects(fi.query)


# ---------------------------------------------------------------------------
# Dialect-only construct analysis
# ---------------------------------------------------------------------------

# construct tag -> dialect kinds that support it
CONSTRUCT_SUPPORT = {
    "sample-by": (KIND_TIME_SERIES,),
    "latest-on": (KIND_TIME_SERIES,),
    "symbol": (KIND_TIME_SERIES,),
    "timestamp-in": (KIND_TIME_SERIES,),
    "designated-timestamp": (KIND_TIME_SERIES,),
    "tumble": (KIND_STREAMING,),
    "hop": (KIND_STREAMING,),
    "symmetric-between": (KIND_REFERENCE,),
    "count_distinct": (KIND_TIME_SERIES,),
    "dateadd": (KIND_TIME_SERIES,),
    "datediff": (KIND_TIME_SERIES,),
}

TARGET_ONLY_FUNCS = ("count_distinct", "dateadd", "datediff")


def construct_supported(tag: str, dialect: Dialect) -> bool:
    if dialect.kind == KIND_CANONICAL:
        return True
    kinds = CONSTRUCT_SUPPORT.get(tag)
    return kinds is None or dialect.kind in kinds


def dialect_only_constructs(stmt) -> frozenset:
    """Tags of dialect-only constructs appearing anywhere in the statement."""
    tags = set()
    if isinstance(stmt, CreateTable):
        if stmt.designated_ts is not None:
            tags.add("designated-timestamp")
        for col in stmt.columns:
            if col.dtype.variant == SYMBOL:
                tags.add("symbol")
        return frozenset(tags)
    if isinstance(stmt, (Select, SetOp)):
        for sel in iter_selects(stmt):
            if sel.sample_by is not None:
                tags.add("sample-by")
            if sel.latest_on is not None:
                tags.add("latest-on")
            for fi in sel.from_items:
                for tag in _from_item_dialect_tags(fi):
                    tags.add(tag)
    for e in iter_exprs(stmt):
        if isinstance(e, TimestampIn):
            tags.add("timestamp-in")
        elif isinstance(e, Between) and e.symmetric:
            tags.add("symmetric-between")
        elif isinstance(e, FuncCall) and e.name in TARGET_ONLY_FUNCS:
            tags.add(e.name)
        elif isinstance(e, Cast) and e.dtype.variant == SYMBOL:
            tags.add("symbol")
    return frozenset(tags)


def _from_item_dialect_tags(fi):
    if isinstance(fi, WindowTable):
        yield fi.kind
    elif isinstance(fi, Join):
        yield from _from_item_dialect_tags(fi.left)
        yield from _from_item_dialect_tags(fi.right)
    elif isinstance(fi, SubquerySource):
        for sel in iter_selects(fi.query):
            if sel.sample_by is not None:
                yield "sample-by"
            if sel.latest_on is not None:
                yield "latest-on"
            for sub in sel.from_items:
                yield from _from_item_dialect_tags(sub)
