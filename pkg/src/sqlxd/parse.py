"""Parser for the harness grammar subset.

Exists to round-trip generator output and to load repro scripts; it is not
a general SQL frontend. parse(render(s, d), d) is structurally equal to s
for every generator-producible statement s.
"""

from __future__ import annotations

import datetime
import re

from .errors import SqlSyntaxError, UnsupportedConstruct
from .sqlast import (
    Arith,
    Between,
    BoolOp,
    CaseWhen,
    Cast,
    ColumnDef,
    ColumnRef,
    Comparison,
    CreateTable,
    DataType,
    Dialect,
    Extract,
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
    CANONICAL,
    STAR,
    T_BIGINT,
    T_BOOLEAN,
    T_FLOAT,
    T_INTEGER,
    T_STRING,
    T_TIMESTAMP,
    BIGINT,
    BOOLEAN,
    FLOAT,
    INTEGER,
    SHORT,
    STRING,
    SYMBOL,
    TIMESTAMP,
    construct_supported,
    dialect_only_constructs,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>'(?:[^']|'')*')
  | (?P<op><=|>=|!=|<>|=|<|>|\(|\)|,|\.|\*|\+|-|/|;)
    """,
    re.VERBOSE,
)

_TS_RE = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}\.\d{6}$")

_EPOCH = datetime.datetime(1970, 1, 1)

_INT32_MAX = 2**31 - 1
_INT32_MIN = -(2**31)

_TYPE_KEYWORDS = {
    "int": INTEGER,
    "integer": INTEGER,
    "long": BIGINT,
    "bigint": BIGINT,
    "double": FLOAT,
    "float": FLOAT,
    "real": FLOAT,
    "boolean": BOOLEAN,
    "string": STRING,
    "varchar": STRING,
    "text": STRING,
    "symbol": SYMBOL,
    "timestamp": TIMESTAMP,
    "short": SHORT,
    "smallint": SHORT,
}

_CMP_OPS = {"=", "!=", "<>", "<", "<=", ">", ">="}

# words that cannot serve as identifiers; type keywords and function names
# stay usable as column/table names like in real dialects
_RESERVED = frozenset(
    """select from where group order by limit distinct and or not in between is
    null case when then else end union except intersect all as on join cross
    left inner values insert into create table sample latest partition fill
    over symmetric interval desc asc true false""".split()
)


def tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SqlSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        pos = m.end()
        if m.lastgroup == "ws":
            continue
        value = m.group()
        if m.lastgroup == "string":
            value = value[1:-1].replace("''", "'")
        tokens.append((m.lastgroup, value, m.start()))
    tokens.append(("eof", "", len(text)))
    return tokens


def parse(text: str, dialect: Dialect = CANONICAL):
    """Parse a single statement; validates dialect-only constructs."""
    p = _Parser(text)
    stmt = p.statement()
    p.accept_op(";")
    p.expect_eof()
    _validate_dialect(stmt, dialect, text)
    return stmt


def parse_script(text: str, dialect: Dialect = CANONICAL) -> list:
    """Parse a semicolon-separated script into a list of statements."""
    p = _Parser(text)
    stmts = []
    while not p.at_eof():
        stmts.append(p.statement())
        if not p.accept_op(";"):
            break
    p.expect_eof()
    for stmt in stmts:
        _validate_dialect(stmt, dialect, text)
    return stmts


def _validate_dialect(stmt, dialect: Dialect, text: str):
    for tag in sorted(dialect_only_constructs(stmt)):
        if not construct_supported(tag, dialect):
            raise UnsupportedConstruct(dialect.name, tag)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    # -- token helpers ------------------------------------------------------

    def peek(self, offset=0):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.i]
        if tok[0] != "eof":
            self.i += 1
        return tok

    def at_eof(self) -> bool:
        return self.peek()[0] == "eof"

    def error(self, message):
        raise SqlSyntaxError(message, self.peek()[2], self.text)

    def at_kw(self, *words) -> bool:
        tok = self.peek()
        return tok[0] == "ident" and tok[1].lower() in words

    def accept_kw(self, *words) -> bool:
        if self.at_kw(*words):
            self.next()
            return True
        return False

    def expect_kw(self, word):
        if not self.accept_kw(word):
            self.error(f"expected {word.upper()}")

    def at_op(self, op) -> bool:
        tok = self.peek()
        return tok[0] == "op" and tok[1] == op

    def accept_op(self, op) -> bool:
        if self.at_op(op):
            self.next()
            return True
        return False

    def expect_op(self, op):
        if not self.accept_op(op):
            self.error(f"expected {op!r}")

    def ident(self) -> str:
        tok = self.peek()
        if tok[0] != "ident" or tok[1].lower() in _RESERVED:
            self.error("expected identifier")
        self.next()
        return tok[1].lower()

    def raw_ident(self) -> str:
        tok = self.peek()
        if tok[0] != "ident":
            self.error("expected word")
        self.next()
        return tok[1].lower()

    def expect_eof(self):
        if not self.at_eof():
            self.error("unexpected trailing input")

    # -- statements ---------------------------------------------------------

    def statement(self):
        if self.at_kw("create"):
            return self.create_table()
        if self.at_kw("insert"):
            return self.insert()
        if self.at_kw("select") or self.at_op("("):
            return self.query_expr()
        self.error("expected CREATE, INSERT, SELECT, or a parenthesized query")

    def create_table(self):
        self.expect_kw("create")
        self.expect_kw("table")
        name = self.ident()
        self.expect_op("(")
        columns = []
        while True:
            col = self.ident()
            columns.append(ColumnDef(col, self.data_type()))
            if not self.accept_op(","):
                break
        self.expect_op(")")
        designated = None
        if self.at_kw("timestamp"):
            self.next()
            self.expect_op("(")
            designated = self.ident()
            self.expect_op(")")
        return CreateTable(name, tuple(columns), designated)

    def data_type(self) -> DataType:
        word = self.ident()
        if word not in _TYPE_KEYWORDS:
            self.error(f"unknown type {word!r}")
        variant = _TYPE_KEYWORDS[word]
        length = None
        if self.at_op("("):
            self.next()
            tok = self.next()
            if tok[0] != "number":
                self.error("expected type length")
            length = int(tok[1])
            self.expect_op(")")
        if variant != STRING:
            length = None
        return DataType(variant, length)

    def insert(self):
        self.expect_kw("insert")
        self.expect_kw("into")
        table = self.ident()
        self.expect_kw("values")
        rows = []
        while True:
            self.expect_op("(")
            row = [self.expr()]
            while self.accept_op(","):
                row.append(self.expr())
            self.expect_op(")")
            rows.append(tuple(row))
            if not self.accept_op(","):
                break
        return Insert(table, tuple(rows))

    # -- queries ------------------------------------------------------------

    def query_expr(self):
        left = self.query_term()
        while True:
            pos = self.peek()[2]
            op = self._setop_keyword()
            if op is None:
                return left
            right = self.query_term()
            try:
                left = SetOp(op, left, right)
            except ValueError as exc:
                raise SqlSyntaxError(str(exc), pos, self.text)

    def _setop_keyword(self):
        tok = self.peek()
        if tok[0] != "ident":
            return None
        word = tok[1].lower()
        if word == "union":
            self.next()
            if self.accept_kw("all"):
                return "union-all"
            return "union"
        if word in ("except", "intersect"):
            self.next()
            return word
        return None

    def query_term(self):
        if self.accept_op("("):
            inner = self.query_expr()
            self.expect_op(")")
            return inner
        return self.select_core()

    def select_core(self) -> Select:
        self.expect_kw("select")
        distinct = self.accept_kw("distinct")
        projections = [self.select_item()]
        while self.accept_op(","):
            projections.append(self.select_item())
        from_items = []
        if self.accept_kw("from"):
            from_items.append(self.from_item())
            while self.accept_op(","):
                from_items.append(self.from_item())
        latest_on = self._latest_on()
        where = None
        if self.accept_kw("where"):
            where = self.expr()
        if latest_on is None:
            latest_on = self._latest_on()
        group_by = []
        if self.at_kw("group"):
            self.next()
            self.expect_kw("by")
            group_by.append(self.expr())
            while self.accept_op(","):
                group_by.append(self.expr())
        sample_by = None
        if self.at_kw("sample"):
            self.next()
            self.expect_kw("by")
            sample_by = SampleBy(self._interval_token(), self._fill_mode())
        order_by = []
        if self.at_kw("order"):
            self.next()
            self.expect_kw("by")
            order_by.append(self.order_item())
            while self.accept_op(","):
                order_by.append(self.order_item())
        limit = None
        if self.accept_kw("limit"):
            tok = self.next()
            if tok[0] != "number" or "." in tok[1]:
                self.error("expected integer limit")
            limit = int(tok[1])
        return Select(
            projections=tuple(projections),
            from_items=tuple(from_items),
            where=where,
            group_by=tuple(group_by),
            sample_by=sample_by,
            latest_on=latest_on,
            order_by=tuple(order_by),
            limit=limit,
            distinct=distinct,
        )

    def _latest_on(self):
        if not self.at_kw("latest"):
            return None
        self.next()
        self.expect_kw("on")
        ts_col = self.column_ref()
        self.expect_kw("partition")
        self.expect_kw("by")
        keys = [self.column_ref()]
        while self.accept_op(","):
            keys.append(self.column_ref())
        return LatestOn(ts_col, tuple(keys))

    def _interval_token(self) -> str:
        # SAMPLE BY intervals lex as number + ident ("1" "h"); require adjacency
        num = self.peek()
        if num[0] != "number":
            self.error("expected sample interval")
        self.next()
        unit = self.peek()
        if unit[0] != "ident" or unit[2] != num[2] + len(num[1]):
            self.error("expected sample interval unit")
        self.next()
        return f"{num[1]}{unit[1].lower()}"

    def _fill_mode(self):
        if not self.at_kw("fill"):
            return None
        self.next()
        self.expect_op("(")
        mode = self.raw_ident()
        self.expect_op(")")
        return mode

    def select_item(self) -> SelectItem:
        if self.at_op("*"):
            self.next()
            return SelectItem(STAR)
        expr = self.expr()
        alias = None
        if self.accept_kw("as"):
            alias = self.ident()
        return SelectItem(expr, alias)

    def order_item(self) -> OrderItem:
        expr = self.expr()
        desc = False
        if self.accept_kw("desc"):
            desc = True
        else:
            self.accept_kw("asc")
        return OrderItem(expr, desc)

    # -- from items ---------------------------------------------------------

    def from_item(self):
        item = self.primary_from()
        while True:
            if self.at_kw("cross"):
                self.next()
                self.expect_kw("join")
                item = Join("cross", item, self.primary_from())
            elif self.at_kw("join", "left"):
                kind = "inner"
                if self.accept_kw("left"):
                    kind = "left"
                self.expect_kw("join")
                right = self.primary_from()
                self.expect_kw("on")
                item = Join(kind, item, right, self.expr())
            else:
                return item

    def primary_from(self):
        if self.accept_op("("):
            query = self.query_expr()
            self.expect_op(")")
            self.expect_kw("as")
            return SubquerySource(query, self.ident())
        if self.at_kw("tumble", "hop") and self.peek(1)[0] == "op" and self.peek(1)[1] == "(":
            return self.window_table()
        name = self.ident()
        alias = None
        if self.accept_kw("as"):
            alias = self.ident()
        return TableRef(name, alias)

    def window_table(self) -> WindowTable:
        kind = self.ident()
        self.expect_op("(")
        table = TableRef(self.ident())
        self.expect_op(",")
        ts_col = self.column_ref()
        self.expect_op(",")
        slide = self.interval_literal()
        size = None
        if self.accept_op(","):
            size = self.interval_literal()
        self.expect_op(")")
        if kind == "hop" and size is None:
            self.error("hop requires slide and size intervals")
        alias = None
        if self.accept_kw("as"):
            alias = self.ident()
        return WindowTable(kind, table, ts_col, slide, size, alias)

    def interval_literal(self) -> Interval:
        self.expect_kw("interval")
        tok = self.next()
        if tok[0] != "string":
            self.error("expected interval text")
        return Interval(tok[1].lower())

    def column_ref(self) -> ColumnRef:
        name = self.ident()
        if self.at_op(".") and self.peek(1)[0] == "ident":
            self.next()
            return ColumnRef(self.ident(), name)
        return ColumnRef(name)

    # -- expressions --------------------------------------------------------

    def expr(self):
        return self.or_expr()

    def or_expr(self):
        left = self.and_expr()
        while self.accept_kw("or"):
            left = BoolOp("or", left, self.and_expr())
        return left

    def and_expr(self):
        left = self.not_expr()
        while self.accept_kw("and"):
            left = BoolOp("and", left, self.not_expr())
        return left

    def not_expr(self):
        if self.accept_kw("not"):
            return Not(self.not_expr())
        return self.cmp_expr()

    def cmp_expr(self):
        left = self.additive()
        tok = self.peek()
        if tok[0] == "op" and tok[1] in _CMP_OPS:
            self.next()
            op = "!=" if tok[1] == "<>" else tok[1]
            return Comparison(op, left, self.additive())
        if self.at_kw("in"):
            self.next()
            if self.peek()[0] == "string":
                return TimestampIn(left, self.next()[1])
            self.expect_op("(")
            items = [self.additive()]
            while self.accept_op(","):
                items.append(self.additive())
            self.expect_op(")")
            return InList(left, tuple(items))
        if self.at_kw("between"):
            self.next()
            symmetric = self.accept_kw("symmetric")
            low = self.additive()
            self.expect_kw("and")
            high = self.additive()
            return Between(left, low, high, symmetric)
        if self.at_kw("is"):
            self.next()
            negated = self.accept_kw("not")
            self.expect_kw("null")
            return IsNull(left, negated)
        return left

    def additive(self):
        left = self.multiplicative()
        while True:
            if self.at_op("+"):
                self.next()
                left = Arith("+", left, self.multiplicative())
            elif self.at_op("-"):
                self.next()
                left = Arith("-", left, self.multiplicative())
            else:
                return left

    def multiplicative(self):
        left = self.unary()
        while True:
            if self.at_op("*"):
                self.next()
                left = Arith("*", left, self.unary())
            elif self.at_op("/"):
                self.next()
                left = Arith("/", left, self.unary())
            else:
                return left

    def unary(self):
        if self.at_op("-"):
            pos = self.peek()[2]
            self.next()
            operand = self.unary()
            if isinstance(operand, Literal) and operand.value is not None:
                if operand.dtype.variant == FLOAT:
                    return Literal(-operand.value, operand.dtype)
                if operand.dtype.variant in (INTEGER, BIGINT):
                    # re-derive the type: the magnitude alone may exceed int32
                    # while the negated value fits (e.g. -2147483648)
                    value = -operand.value
                    if _INT32_MIN <= value <= _INT32_MAX:
                        return Literal(value, T_INTEGER)
                    return Literal(value, T_BIGINT)
            raise SqlSyntaxError("unary minus applies to numeric literals only", pos, self.text)
        return self.primary()

    def primary(self):
        tok = self.peek()
        if tok[0] == "number":
            self.next()
            return _number_literal(tok[1])
        if tok[0] == "string":
            self.next()
            return _string_literal(tok[1])
        if self.at_op("("):
            self.next()
            if self._paren_group_is_query():
                query = self.query_expr()
                self.expect_op(")")
                return SubqueryExpr(query)
            inner = self.expr()
            self.expect_op(")")
            return inner
        if tok[0] != "ident":
            self.error("expected expression")
        word = tok[1].lower()
        if word == "null":
            self.next()
            return Literal(None, T_INTEGER)
        if word == "true":
            self.next()
            return Literal(True, T_BOOLEAN)
        if word == "false":
            self.next()
            return Literal(False, T_BOOLEAN)
        if word == "case":
            return self.case_when()
        if word == "interval":
            return self.interval_literal()
        if word == "extract" and self.peek(1)[0] == "op" and self.peek(1)[1] == "(":
            self.next()
            self.next()
            unit = self.ident()
            self.expect_kw("from")
            expr = self.expr()
            self.expect_op(")")
            return Extract(unit, expr)
        if word == "cast" and self.peek(1)[0] == "op" and self.peek(1)[1] == "(":
            self.next()
            self.next()
            expr = self.expr()
            self.expect_kw("as")
            dtype = self.data_type()
            self.expect_op(")")
            return Cast(expr, dtype)
        if self.peek(1)[0] == "op" and self.peek(1)[1] == "(":
            return self.func_call()
        return self.column_ref()

    def _paren_group_is_query(self) -> bool:
        # first token past any run of open parens decides: SELECT means subquery
        j = self.i
        while self.tokens[j][0] == "op" and self.tokens[j][1] == "(":
            j += 1
        tok = self.tokens[j]
        return tok[0] == "ident" and tok[1].lower() == "select"

    def case_when(self) -> CaseWhen:
        self.expect_kw("case")
        whens = []
        while self.accept_kw("when"):
            cond = self.expr()
            self.expect_kw("then")
            whens.append((cond, self.expr()))
        if not whens:
            self.error("CASE requires at least one WHEN branch")
        else_ = None
        if self.accept_kw("else"):
            else_ = self.expr()
        self.expect_kw("end")
        return CaseWhen(tuple(whens), else_)

    def func_call(self):
        name = self.ident()
        self.expect_op("(")
        star = False
        distinct = False
        args = []
        if self.accept_op("*"):
            star = True
        elif not self.at_op(")"):
            distinct = self.accept_kw("distinct")
            args.append(self.expr())
            while self.accept_op(","):
                args.append(self.expr())
        self.expect_op(")")
        func = FuncCall(name, tuple(args), distinct, star)
        if self.at_kw("over"):
            self.next()
            self.expect_op("(")
            partition = []
            order = []
            if self.at_kw("partition"):
                self.next()
                self.expect_kw("by")
                partition.append(self.expr())
                while self.accept_op(","):
                    partition.append(self.expr())
            if self.at_kw("order"):
                self.next()
                self.expect_kw("by")
                order.append(self.order_item())
                while self.accept_op(","):
                    order.append(self.order_item())
            self.expect_op(")")
            return WindowFunc(func, tuple(partition), tuple(order))
        return func


def _number_literal(text: str) -> Literal:
    if "." in text or "e" in text or "E" in text:
        return Literal(float(text), T_FLOAT)
    value = int(text)
    if _INT32_MIN <= value <= _INT32_MAX:
        return Literal(value, T_INTEGER)
    return Literal(value, T_BIGINT)


def _string_literal(text: str) -> Literal:
    if _TS_RE.match(text):
        dt = datetime.datetime.strptime(text, "%Y-%m-%dT%H:%M:%S.%f")
        delta = dt - _EPOCH
        micros = (delta.days * 86400 + delta.seconds) * 1_000_000 + delta.microseconds
        return Literal(micros, T_TIMESTAMP)
    return Literal(text, T_STRING)
