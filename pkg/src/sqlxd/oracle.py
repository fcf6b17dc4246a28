"""Result oracle: normalization, verdict comparison, error classification,
and a brute-force mini-evaluator of scalar expressions under both NULL
models.

The oracle's premise: a mapped query pair must yield identical results, so
after canonicalization any difference between the target's rows and the
reference's rows is a logic discrepancy, and an abort that the reference
does not share is an internal error.

The mini-evaluator exists to validate null-guard and range mapping rules
exhaustively: the two models differ exactly in comparison-class semantics
(comparisons, IN, BETWEEN). Under the value-null model NULL behaves as an
ordinary comparable value that sorts below every non-null value and range
checks are implicitly symmetric; under the three-valued model comparisons
with NULL yield NULL and NULL propagates through boolean operators per
Kleene logic. Boolean connectives and CASE branching behave identically in
both models.
"""

from __future__ import annotations

import datetime
import enum
import re
from dataclasses import dataclass

from .errors import UnsupportedExpr
from .sqlast import (
    Between,
    BoolOp,
    CaseWhen,
    ColumnRef,
    Comparison,
    InList,
    IsNull,
    Literal,
    Not,
    BOOLEAN,
    FLOAT,
    TIMESTAMP,
)

# ---------------------------------------------------------------------------
# Canonical scalars
# ---------------------------------------------------------------------------

_EPOCH = datetime.datetime(1970, 1, 1)

FLOAT_ABS_FLOOR = 1e-12  # values this close to zero canonicalize to 0.0
_TS_FORMATS = (
    "%Y-%m-%dT%H:%M:%S.%f",
    "%Y-%m-%d %H:%M:%S.%f",
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M:%S",
)


def canon_float(value: float) -> float:
    """Round to comparison precision: 1e-9 relative, 1e-12 absolute near zero."""
    if value != value:
        return float("nan")
    if abs(value) < FLOAT_ABS_FLOOR:
        return 0.0
    return float(f"{value:.9e}")


def timestamp_micros(value) -> int:
    """Epoch microseconds from an int, datetime, or common ISO text forms."""
    if isinstance(value, bool):
        raise ValueError("boolean is not a timestamp")
    if isinstance(value, int):
        return value
    if isinstance(value, datetime.datetime):
        value = value.replace(tzinfo=None)
        delta = value - _EPOCH
        return (delta.days * 86400 + delta.seconds) * 1_000_000 + delta.microseconds
    text = str(value).strip().rstrip("Z")
    if text.endswith("+00") or text.endswith("+00:00"):
        text = text.rsplit("+", 1)[0]
    for fmt in _TS_FORMATS:
        try:
            return timestamp_micros(datetime.datetime.strptime(text, fmt))
        except ValueError:
            continue
    raise ValueError(f"unrecognized timestamp text {value!r}")


def canon_scalar(value, type_variant=None):
    """Canonical (tag, value) pair for one result cell.

    NULL gets its own tag so it can never collide with any concrete value;
    booleans stay distinct from integers; integral floats unify with ints so
    count-vs-numeric representation differences across systems collapse.
    """
    if value is None:
        return ("null", None)
    if type_variant == TIMESTAMP:
        return ("ts", timestamp_micros(value))
    if isinstance(value, bool):
        return ("bool", value)
    if isinstance(value, int):
        return ("num", value)
    if isinstance(value, float):
        c = canon_float(value)
        if c == int(c) and abs(c) < 2**53:
            return ("num", int(c))
        return ("num", c)
    if type_variant == BOOLEAN and str(value).lower() in ("t", "true", "f", "false"):
        return ("bool", str(value).lower() in ("t", "true"))
    if type_variant == FLOAT:
        return canon_scalar(float(value))
    return ("str", str(value))


def _sort_key(row):
    return tuple((tag, repr(v)) for tag, v in row)


@dataclass(frozen=True)
class NormalizedResult:
    """Canonical multiset of result rows; a sequence when ordered is set."""

    rows: tuple
    ordered: bool = False


def normalize(outcome, has_order_by: bool = False) -> NormalizedResult:
    """Canonical form of a rows outcome. Idempotent; order-insensitive
    unless the producing query carried a top-level ORDER BY."""
    if isinstance(outcome, NormalizedResult):
        return outcome
    if outcome.status != "rows":
        raise ValueError("normalize requires a rows outcome")
    types = outcome.column_types or ()
    rows = []
    for raw in outcome.rows:
        rows.append(
            tuple(
                canon_scalar(v, types[i] if i < len(types) else None)
                for i, v in enumerate(raw)
            )
        )
    if not has_order_by:
        rows.sort(key=_sort_key)
    return NormalizedResult(tuple(rows), has_order_by)


# ---------------------------------------------------------------------------
# Error classification
# ---------------------------------------------------------------------------

DEFAULT_INTERNAL_PATTERNS = (
    "NullPointerException",
    "OutOfBound",
    "core dumped",
    r"Index .* out of bounds",
    "segmentation fault",
    "TIMEOUT",
)
DEFAULT_EXPECTED_PATTERNS = (
    "feature not supported",
    "not implemented",
)


@dataclass(frozen=True)
class ErrorClassifier:
    """Keyword heuristics separating true internal errors from benign refusals.

    Internal patterns win over expected ones, so an error matching both is
    conservatively treated as internal. Errors matching neither list count
    as expected: inconsistent aborts are caught by the rows-vs-error verdict
    path independently of the keyword lists.
    """

    internal_patterns: tuple = DEFAULT_INTERNAL_PATTERNS
    expected_patterns: tuple = DEFAULT_EXPECTED_PATTERNS

    def with_extensions(self, internal=(), expected=()):
        return ErrorClassifier(
            self.internal_patterns + tuple(internal),
            self.expected_patterns + tuple(expected),
        )

    def classify(self, text: str) -> str:
        if not text:
            raise ValueError("empty error text")
        for pattern in self.internal_patterns:
            if re.search(pattern, text, re.IGNORECASE):
                return "internal"
        return "expected"

    def matched_internal_pattern(self, text: str):
        for pattern in self.internal_patterns:
            if re.search(pattern, text, re.IGNORECASE):
                return pattern
        return None


def classify_error(text: str, classifier: ErrorClassifier = None) -> str:
    return (classifier or ErrorClassifier()).classify(text)


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


class Verdict(enum.Enum):
    EQUAL = "equal"
    LOGIC_DISCREPANCY = "logic-discrepancy"
    INTERNAL_ERROR = "internal-error"
    EXPECTED_ERROR = "expected-error"
    BOTH_ERROR_CONSISTENT = "both-error-consistent"


def compare(target, reference, ordered: bool = False, classifier: ErrorClassifier = None) -> Verdict:
    """Verdict for one executed pair.

    rows/rows compares normalized results. A target abort against reference
    rows is an inconsistent abort and therefore an internal error regardless
    of its text. Target rows against an expected reference refusal is
    surfaced as expected-error: it usually indicates a mapping rule that
    needs review, not a database bug.
    """
    classifier = classifier or ErrorClassifier()
    t_rows = target.status == "rows"
    r_rows = reference.status == "rows"
    if t_rows and r_rows:
        if normalize(target, ordered) == normalize(reference, ordered):
            return Verdict.EQUAL
        return Verdict.LOGIC_DISCREPANCY
    if not t_rows and not r_rows:
        t_class = classifier.classify(target.error_text)
        r_class = classifier.classify(reference.error_text)
        if t_class == "expected" and r_class == "expected":
            return Verdict.BOTH_ERROR_CONSISTENT
        return Verdict.INTERNAL_ERROR
    if not t_rows:
        # target aborted on input the reference handled
        return Verdict.INTERNAL_ERROR
    if classifier.classify(reference.error_text) == "expected":
        return Verdict.EXPECTED_ERROR
    return Verdict.INTERNAL_ERROR


# ---------------------------------------------------------------------------
# Scalar mini-evaluator
# ---------------------------------------------------------------------------

VALUE_NULL = "value-null"
THREE_VALUED = "three-valued"


def eval_expr(expr, binding, model: str):
    """Evaluate a scalar expression under one NULL model.

    binding maps column names to Python scalars (None for NULL). The value
    returned is True, False, None, or a scalar, with None serving as the
    unified NULL token for both models.
    """
    if model not in (VALUE_NULL, THREE_VALUED):
        raise ValueError(f"unknown model {model!r}")
    return _eval(expr, binding, model)


def _eval(expr, binding, model):
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, ColumnRef):
        if expr.name not in binding:
            raise UnsupportedExpr(f"unbound column {expr.name!r}")
        return binding[expr.name]
    if isinstance(expr, Comparison):
        return _compare_vals(
            expr.op, _eval(expr.left, binding, model), _eval(expr.right, binding, model), model
        )
    if isinstance(expr, InList):
        left = _eval(expr.expr, binding, model)
        items = [_eval(i, binding, model) for i in expr.items]
        if model == VALUE_NULL:
            return any(_vn_eq(left, i) for i in items)
        saw_null = False
        for item in items:
            r = _compare_vals("=", left, item, THREE_VALUED)
            if r is True:
                return True
            if r is None:
                saw_null = True
        return None if saw_null else False
    if isinstance(expr, Between):
        v = _eval(expr.expr, binding, model)
        lo = _eval(expr.low, binding, model)
        hi = _eval(expr.high, binding, model)
        if model == VALUE_NULL:
            # target range checks are implicitly symmetric
            lo, hi = sorted((lo, hi), key=_vn_rank)
            return _vn_le(lo, v) and _vn_le(v, hi)
        if v is None or lo is None or hi is None:
            return None
        if expr.symmetric and _vn_rank(lo) > _vn_rank(hi):
            lo, hi = hi, lo
        return lo <= v <= hi
    if isinstance(expr, IsNull):
        result = _eval(expr.expr, binding, model) is None
        return (not result) if expr.negated else result
    if isinstance(expr, CaseWhen):
        for cond, result in expr.whens:
            if _eval(cond, binding, model) is True:
                return _eval(result, binding, model)
        if expr.else_ is not None:
            return _eval(expr.else_, binding, model)
        return None
    if isinstance(expr, BoolOp):
        left = _truth(_eval(expr.left, binding, model))
        right = _truth(_eval(expr.right, binding, model))
        if expr.op == "and":
            if left is False or right is False:
                return False
            if left is None or right is None:
                return None
            return True
        if left is True or right is True:
            return True
        if left is None or right is None:
            return None
        return False
    if isinstance(expr, Not):
        value = _truth(_eval(expr.expr, binding, model))
        return None if value is None else not value
    raise UnsupportedExpr(f"{type(expr).__name__} is outside the evaluator subset")


def _truth(value):
    if value is None or isinstance(value, bool):
        return value
    raise UnsupportedExpr(f"non-boolean operand {value!r} in boolean context")


def _vn_rank(value):
    # NULL sorts below every non-null value in the value-null model
    if value is None:
        return (0, 0)
    if isinstance(value, bool):
        return (1, int(value))
    if isinstance(value, str):
        return (2, value)
    return (1, value)


def _vn_eq(left, right):
    if left is None or right is None:
        return left is None and right is None
    if isinstance(left, bool) != isinstance(right, bool):
        return False
    return left == right


def _vn_le(left, right):
    return _vn_rank(left) <= _vn_rank(right)


def _compare_vals(op, left, right, model):
    if model == THREE_VALUED:
        if left is None or right is None:
            return None
        table = {
            "=": left == right,
            "!=": left != right,
            "<": left < right,
            "<=": left <= right,
            ">": left > right,
            ">=": left >= right,
        }
        return table[op]
    if op == "=":
        return _vn_eq(left, right)
    if op == "!=":
        return not _vn_eq(left, right)
    lr, rr = _vn_rank(left), _vn_rank(right)
    if op == "<":
        return lr < rr
    if op == "<=":
        return lr <= rr
    if op == ">":
        return lr > rr
    return lr >= rr
