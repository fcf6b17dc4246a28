"""Result normalization, verdicts, error classification, and the two-model
scalar evaluator."""

import pytest
from hypothesis import given, settings, strategies as st

from sqlxd.errors import UnsupportedExpr
from sqlxd.executor import error_outcome, rows_outcome
from sqlxd.oracle import (
    ErrorClassifier,
    THREE_VALUED,
    VALUE_NULL,
    Verdict,
    canon_float,
    classify_error,
    compare,
    eval_expr,
    normalize,
    timestamp_micros,
)
from sqlxd.parse import parse
from sqlxd.sqlast import FuncCall


def boolean_rows(*values):
    return rows_outcome([[v] for v in values], ["boolean"])


def int_rows(*values):
    return rows_outcome([[v] for v in values], ["integer"])


class TestNormalize:
    def test_multiset_keeps_duplicates(self):
        n = normalize(int_rows(1, 1))
        assert n.rows == ((("num", 1),), (("num", 1),))

    def test_unordered_rows_compare_as_multisets(self):
        assert normalize(int_rows(1, 2)) == normalize(int_rows(2, 1))

    def test_order_by_preserves_sequence(self):
        assert normalize(int_rows(1, 2), True) != normalize(int_rows(2, 1), True)

    def test_float_tolerance(self):
        a = rows_outcome([[1.333333]], ["float"])
        b = rows_outcome([[1.3333330000001]], ["float"])
        assert normalize(a) == normalize(b)

    def test_near_zero_absolute_floor(self):
        assert canon_float(1e-13) == 0.0
        assert canon_float(-1e-13) == 0.0
        assert canon_float(1e-9) != 0.0

    def test_idempotent(self):
        n = normalize(int_rows(3, 1, 2))
        assert normalize(n) == n

    def test_timestamps_canonicalize_to_epoch_micros(self):
        a = rows_outcome([["2023-01-01T00:00:00.000000"]], ["timestamp"])
        b = rows_outcome([["2023-01-01 00:00:00"]], ["timestamp"])
        assert normalize(a) == normalize(b)
        assert timestamp_micros("2023-01-01 00:00:00+00") == 1_672_531_200_000_000

    def test_null_distinct_from_every_value(self):
        assert normalize(boolean_rows(None)) != normalize(boolean_rows(False))
        assert normalize(int_rows(None)) != normalize(int_rows(0))

    def test_bool_distinct_from_int(self):
        a = rows_outcome([[True]], ["boolean"])
        b = rows_outcome([[1]], ["integer"])
        assert normalize(a) != normalize(b)


class TestCompare:
    def test_true_vs_null_is_logic_discrepancy(self):
        assert compare(boolean_rows(True), boolean_rows(None)) is Verdict.LOGIC_DISCREPANCY

    def test_count_discrepancy(self):
        assert compare(int_rows(1), int_rows(0)) is Verdict.LOGIC_DISCREPANCY

    def test_target_abort_with_reference_rows_is_internal(self):
        target = error_outcome("ERROR: Invalid Column c0")
        assert compare(target, int_rows(None)) is Verdict.INTERNAL_ERROR

    def test_setop_duplicates(self):
        assert compare(int_rows(1, 1), int_rows(1)) is Verdict.LOGIC_DISCREPANCY

    def test_equal_multisets(self):
        assert compare(int_rows(2, 1), int_rows(1, 2)) is Verdict.EQUAL

    def test_both_expected_errors_consistent(self):
        a = error_outcome("feature not supported: FULL JOIN")
        b = error_outcome("feature not supported: FULL JOIN")
        assert compare(a, b) is Verdict.BOTH_ERROR_CONSISTENT

    def test_unexpected_error_either_side_is_internal(self):
        crash = error_outcome("FATAL crash signal 11 (core dumped)")
        benign = error_outcome("feature not supported")
        assert compare(crash, benign) is Verdict.INTERNAL_ERROR

    def test_reference_expected_refusal_flags_review(self):
        assert compare(int_rows(1), error_outcome("feature not supported")) is Verdict.EXPECTED_ERROR

    def test_reference_unexpected_error_is_internal(self):
        assert compare(int_rows(1), error_outcome("NullPointerException")) is Verdict.INTERNAL_ERROR

    def test_equality_detection_is_symmetric_and_reflexive(self):
        a, b = int_rows(1, 2, 2), int_rows(2, 1, 2)
        assert compare(a, b) is Verdict.EQUAL
        assert compare(b, a) is Verdict.EQUAL
        assert compare(a, a) is Verdict.EQUAL

    @settings(max_examples=100, deadline=None)
    @given(rows=st.lists(st.integers(min_value=-3, max_value=3) | st.none(), max_size=6))
    def test_reflexivity_property(self, rows):
        outcome = int_rows(*rows)
        assert compare(outcome, outcome) is Verdict.EQUAL


class TestClassifyError:
    def test_null_pointer_exception_internal(self):
        assert classify_error("java.lang.NullPointerException at io.questdb...") == "internal"

    def test_feature_not_supported_expected(self):
        assert classify_error("feature not supported: FULL OUTER JOIN") == "expected"

    def test_index_out_of_bounds_internal(self):
        assert classify_error("Index 2 out of bounds for length 2") == "internal"

    def test_timeout_internal(self):
        assert classify_error("TIMEOUT") == "internal"

    def test_matching_both_lists_resolves_internal(self):
        c = ErrorClassifier(expected_patterns=("core dumped", "not implemented"))
        assert c.classify("x core dumped y") == "internal"

    def test_extensions(self):
        c = ErrorClassifier().with_extensions(internal=("panic",))
        assert c.classify("thread panic at src/lib.rs") == "internal"
        assert classify_error("thread panic") == "expected"


def _expr(sql: str):
    return parse(f"SELECT {sql}").projections[0].expr


class TestEvalExpr:
    def test_null_in_list_value_null_true(self):
        expr = _expr("c0 IN (0, NULL)")
        assert eval_expr(expr, {"c0": None}, VALUE_NULL) is True

    def test_null_in_list_three_valued_null(self):
        expr = _expr("c0 IN (0, NULL)")
        assert eval_expr(expr, {"c0": None}, THREE_VALUED) is None

    def test_member_in_both_models(self):
        expr = _expr("c0 IN (0, NULL)")
        for model in (VALUE_NULL, THREE_VALUED):
            assert eval_expr(expr, {"c0": 0}, model) is True

    def test_nonmember_with_null_element(self):
        expr = _expr("c0 IN (0, NULL)")
        assert eval_expr(expr, {"c0": 1}, VALUE_NULL) is False
        assert eval_expr(expr, {"c0": 1}, THREE_VALUED) is None

    def test_null_equality(self):
        expr = _expr("c0 = c1")
        assert eval_expr(expr, {"c0": None, "c1": None}, VALUE_NULL) is True
        assert eval_expr(expr, {"c0": None, "c1": None}, THREE_VALUED) is None

    def test_between_is_symmetric_under_value_null(self):
        expr = _expr("c0 BETWEEN 2 AND 0")
        assert eval_expr(expr, {"c0": 1}, VALUE_NULL) is True
        assert eval_expr(expr, {"c0": 1}, THREE_VALUED) is False

    def test_symmetric_between_three_valued(self):
        expr = _expr("c0 BETWEEN SYMMETRIC 2 AND 0")
        assert eval_expr(expr, {"c0": 1}, THREE_VALUED) is True

    def test_null_sorts_below_everything_in_value_null(self):
        assert eval_expr(_expr("c0 < -1"), {"c0": None}, VALUE_NULL) is True
        assert eval_expr(_expr("c0 > 1"), {"c0": None}, VALUE_NULL) is False

    def test_kleene_connectives_shared_by_both_models(self):
        expr = _expr("c0 IS NULL AND c1 = 1")
        for model in (VALUE_NULL, THREE_VALUED):
            assert eval_expr(expr, {"c0": None, "c1": 1}, model) is True
        null_and = _expr("NULL AND FALSE")
        for model in (VALUE_NULL, THREE_VALUED):
            assert eval_expr(null_and, {}, model) is False

    def test_case_null_condition_skips_branch(self):
        expr = _expr("CASE WHEN c0 = 1 THEN 10 ELSE 20 END")
        assert eval_expr(expr, {"c0": None}, THREE_VALUED) == 20

    def test_outside_subset_raises(self):
        with pytest.raises(UnsupportedExpr):
            eval_expr(FuncCall("count", star=True), {}, THREE_VALUED)
