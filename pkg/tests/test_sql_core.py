"""Rendering and parsing of the grammar subset."""

import pytest
from hypothesis import given, settings, strategies as st

from sqlxd.errors import SqlSyntaxError, UnsupportedConstruct
from sqlxd.generator import GenConfig, QueryGenerator, gen_data, gen_schema
from sqlxd.parse import parse, parse_script
from sqlxd.registry import pool_from_ids
from sqlxd.render import render
from sqlxd.sqlast import (
    CANONICAL,
    POSTGRESQL,
    QUESTDB,
    ColumnRef,
    InList,
    Literal,
    Select,
    SelectItem,
    T_INTEGER,
    T_TIMESTAMP,
    dialect_only_constructs,
)

FULL_POOL = pool_from_ids([
    "select", "where", "group_by", "order_by", "limit", "distinct", "cross_join",
    "inner_join", "subquery", "scalar_subquery", "union", "union_all", "except",
    "intersect", "in_list", "between", "is_null", "case_when", "count", "avg",
    "min", "max", "window_function", "sample_by", "latest_on", "timestamp_in",
    "count_distinct", "symbol_type",
])


class TestRender:
    def test_sample_by_renders_for_time_series(self):
        stmt = parse("select count(*) from T sample by 1h")
        assert render(stmt, QUESTDB) == "SELECT count(*) FROM t SAMPLE BY 1h"

    def test_symbol_create_table_renders_for_time_series(self):
        stmt = parse("create table test (c0 int, c1 symbol, c2 timestamp)")
        assert render(stmt, QUESTDB) == "CREATE TABLE test (c0 INT, c1 SYMBOL, c2 TIMESTAMP)"

    def test_symbol_unmapped_under_reference_errors(self):
        stmt = parse("create table test (c0 int, c1 symbol, c2 timestamp)")
        with pytest.raises(UnsupportedConstruct):
            render(stmt, POSTGRESQL)

    def test_sample_by_under_reference_errors(self):
        stmt = parse("select count(*) from t sample by 1h")
        with pytest.raises(UnsupportedConstruct):
            render(stmt, POSTGRESQL)

    def test_tumble_under_time_series_errors(self):
        stmt = parse("select * from tumble(test, c0, interval '1 day')")
        with pytest.raises(UnsupportedConstruct):
            render(stmt, QUESTDB)

    def test_rendering_is_deterministic(self):
        stmt = parse("select c0, count(*) from t where c0 in (1, 2) group by c0")
        texts = {render(stmt, CANONICAL) for _ in range(10)}
        assert len(texts) == 1

    def test_dialect_safe_statement_renders_everywhere(self):
        stmt = parse("select count(*) from t where c0 between 0 and 2")
        assert not dialect_only_constructs(stmt)
        for dialect in (QUESTDB, POSTGRESQL, CANONICAL):
            assert render(stmt, dialect)

    def test_timestamp_literal_renders_iso_microseconds(self):
        lit = Literal(1_672_531_200_000_000, T_TIMESTAMP)
        sel = Select(projections=(SelectItem(lit),))
        assert render(sel, CANONICAL) == "SELECT '2023-01-01T00:00:00.000000'"


class TestParse:
    def test_select_literal(self):
        stmt = parse("SELECT 1")
        assert isinstance(stmt, Select)
        assert stmt.projections[0].expr == Literal(1, T_INTEGER)

    def test_in_list_with_null_literal(self):
        stmt = parse("SELECT (c0 IN (0, NULL)) FROM test")
        expr = stmt.projections[0].expr
        assert isinstance(expr, InList)
        assert expr.expr == ColumnRef("c0")
        assert expr.items[1].value is None

    def test_syntax_error_carries_position(self):
        with pytest.raises(SqlSyntaxError) as exc:
            parse("SELECT FROM")
        assert exc.value.position == 7

    def test_unbalanced_parens_rejected(self):
        with pytest.raises(SqlSyntaxError):
            parse("SELECT (1")

    def test_identifiers_fold_to_lowercase(self):
        assert parse("SELECT C0 FROM TEST") == parse("select c0 from test")

    def test_script_splitting(self):
        stmts = parse_script("SELECT 1;\nSELECT 2;")
        assert len(stmts) == 2

    def test_dialect_validation_rejects_foreign_constructs(self):
        with pytest.raises(UnsupportedConstruct):
            parse("select count(*) from t sample by 1h", POSTGRESQL)

    def test_boolean_precedence(self):
        a = parse("SELECT c0 = 1 AND c1 = 2 OR c2 = 3 FROM t")
        b = parse("SELECT ((c0 = 1 AND c1 = 2) OR c2 = 3) FROM t")
        assert a == b

    def test_sample_by_with_fill_round_trips(self):
        sql = "SELECT ts, max(a), min(b) FROM t SAMPLE BY 1h FILL(PREV)"
        stmt = parse(sql, QUESTDB)
        assert stmt.sample_by.interval == "1h"
        assert stmt.sample_by.fill == "prev"
        assert parse(render(stmt, QUESTDB), QUESTDB) == stmt

    def test_setop_arity_invariant(self):
        with pytest.raises(SqlSyntaxError):
            parse("(SELECT 1) UNION (SELECT 1, 2)")


class TestRoundTrip:
    """parse(render(s, d), d) == s for everything the generator can emit."""

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32))
    def test_generator_round_trip(self, seed):
        cfg = GenConfig(seed=seed, row_range=(1, 3))
        schema = gen_schema(cfg, QUESTDB)
        gen = QueryGenerator(schema, FULL_POOL, cfg, QUESTDB)
        for _ in range(5):
            stmt = gen.query()
            text = render(stmt, QUESTDB)
            assert parse(text, QUESTDB) == stmt, text

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32))
    def test_schema_and_data_round_trip(self, seed):
        cfg = GenConfig(seed=seed, row_range=(1, 2))
        schema = gen_schema(cfg, QUESTDB)
        for table in schema.tables:
            assert parse(render(table, QUESTDB), QUESTDB) == table
        for stmt in gen_data(schema, cfg):
            assert parse(render(stmt, QUESTDB), QUESTDB) == stmt

    def test_null_literal_round_trips_across_intended_types(self):
        # NULL carries its intended type but compares equal regardless
        assert Literal(None, T_INTEGER) == Literal(None, T_TIMESTAMP)
        stmt = parse("INSERT INTO t VALUES (NULL)")
        assert render(stmt, CANONICAL) == "INSERT INTO t VALUES (NULL)"
