"""Uniform execution over live connections and an offline fixture store.

Both the emerging target and the relational reference are driven through
the reference system's wire protocol (the supported targets expose
compatible endpoints), so one client covers every live endpoint. Replay
endpoints serve recorded outcomes keyed by a canonical SQL digest, which
makes whole campaigns bit-reproducible offline.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from dataclasses import dataclass
from typing import Optional

from .errors import CampaignError, ConnectionLost
from .parse import parse
from .render import render
from .sqlast import CANONICAL, DIALECTS, Dialect

FIXTURE_MISS = "FIXTURE_MISS"


@dataclass(frozen=True)
class ExecOutcome:
    """Result of one statement execution: rows or an error, never both."""

    status: str  # "rows" | "error"
    rows: tuple = ()
    column_types: tuple = ()
    error_text: str = ""
    latency: float = 0.0
    plan_text: Optional[str] = None

    def __post_init__(self):
        if self.status == "rows":
            if self.error_text:
                raise ValueError("rows outcome cannot carry error text")
            for row in self.rows:
                if len(row) != len(self.column_types):
                    raise ValueError("row arity differs from column-types")
        elif self.status == "error":
            if not self.error_text:
                raise ValueError("error outcome requires error text")
            if self.rows:
                raise ValueError("error outcome cannot carry rows")
        else:
            raise ValueError(f"unknown status {self.status!r}")


def rows_outcome(rows, column_types, latency=0.0, plan_text=None) -> ExecOutcome:
    return ExecOutcome(
        "rows",
        tuple(tuple(r) for r in rows),
        tuple(column_types),
        latency=latency,
        plan_text=plan_text,
    )


def error_outcome(text, latency=0.0) -> ExecOutcome:
    return ExecOutcome("error", error_text=text, latency=latency)


def canonical_digest(sql_text: str) -> str:
    """Digest over the canonical rendering so formatting differences collapse.

    Text outside the grammar subset (operational statements like DROP) falls
    back to a whitespace/case-normalized digest.
    """
    try:
        canonical = render(parse(sql_text, CANONICAL), CANONICAL)
    except Exception:
        canonical = re.sub(r"\s+", " ", sql_text.strip()).lower()
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Fixture store
# ---------------------------------------------------------------------------


class FixtureStore:
    """Read-only map from (endpoint-id, sql digest) to a recorded outcome."""

    def __init__(self):
        self.entries = {}

    @classmethod
    def load(cls, *paths) -> "FixtureStore":
        store = cls()
        for path in paths:
            with open(path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line or line.startswith("#"):
                        continue
                    store.add_record(json.loads(line))
        return store

    def add_record(self, record: dict):
        digest = record.get("sql_digest") or canonical_digest(record["sql_text"])
        outcome = outcome_from_record(record)
        self.entries[(record["endpoint_id"], digest)] = outcome

    def get(self, endpoint_id: str, sql_text: str) -> Optional[ExecOutcome]:
        return self.entries.get((endpoint_id, canonical_digest(sql_text)))


def outcome_from_record(record: dict) -> ExecOutcome:
    if record["status"] == "rows":
        return rows_outcome(
            [tuple(r) for r in record.get("rows", [])],
            record.get("column_types", []),
            plan_text=record.get("plan"),
        )
    return error_outcome(record["error"])


def record_from_outcome(endpoint_id: str, sql_text: str, outcome: ExecOutcome) -> dict:
    record = {
        "endpoint_id": endpoint_id,
        "sql_digest": canonical_digest(sql_text),
        "sql_text": sql_text,
        "status": outcome.status,
    }
    if outcome.status == "rows":
        record["rows"] = [list(r) for r in outcome.rows]
        record["column_types"] = list(outcome.column_types)
        if outcome.plan_text is not None:
            record["plan"] = outcome.plan_text
    else:
        record["error"] = outcome.error_text
    return record


# ---------------------------------------------------------------------------
# Executors
# ---------------------------------------------------------------------------


class Executor:
    """One endpoint connection confined to one worker."""

    endpoint_id: str
    dialect: Dialect

    def execute_text(self, sql: str) -> ExecOutcome:
        raise NotImplementedError

    def explain_text(self, sql: str) -> Optional[str]:
        return None

    def close(self):
        pass


def execute(stmt, executor: Executor) -> ExecOutcome:
    """Render a statement for the executor's dialect and run it."""
    return executor.execute_text(render(stmt, executor.dialect))


def explain(stmt, executor: Executor) -> Optional[str]:
    """Raw plan text, or None when the endpoint cannot produce one."""
    return executor.explain_text(render(stmt, executor.dialect))


class FixtureExecutor(Executor):
    def __init__(self, store: FixtureStore, endpoint_id: str, dialect: Dialect):
        self.store = store
        self.endpoint_id = endpoint_id
        self.dialect = dialect

    def execute_text(self, sql: str) -> ExecOutcome:
        outcome = self.store.get(self.endpoint_id, sql)
        if outcome is None:
            return error_outcome(f"{FIXTURE_MISS}: {canonical_digest(sql)}")
        return outcome

    def explain_text(self, sql: str) -> Optional[str]:
        outcome = self.store.get(self.endpoint_id, sql)
        if outcome is None:
            return None
        return outcome.plan_text


class LiveExecutor(Executor):
    """Wire-protocol backed executor with timeout and reconnect policy."""

    def __init__(self, endpoint_id, dialect, host, port, user, database,
                 password=None, timeout=30.0, connect_retries=2):
        self.endpoint_id = endpoint_id
        self.dialect = dialect
        self._params = dict(host=host, port=port, user=user,
                            database=database, password=password)
        self.timeout = timeout
        self.connect_retries = connect_retries
        self._conn = None

    def _connection(self):
        if self._conn is None:
            from . import pgwire

            last = None
            for _ in range(self.connect_retries + 1):
                try:
                    self._conn = pgwire.Connection(timeout=self.timeout, **self._params)
                    return self._conn
                except (OSError, ConnectionLost) as exc:
                    last = exc
                    time.sleep(0.2)
            raise ConnectionLost(f"{self.endpoint_id}: {last}")
        return self._conn

    def execute_text(self, sql: str) -> ExecOutcome:
        start = time.monotonic()
        try:
            columns, rows, error = self._connection().simple_query(sql)
        except TimeoutError:
            self._drop_connection()
            return error_outcome("TIMEOUT", time.monotonic() - start)
        except (OSError, ConnectionLost) as exc:
            self._drop_connection()
            raise ConnectionLost(f"{self.endpoint_id}: {exc}")
        latency = time.monotonic() - start
        if error is not None:
            return error_outcome(error, latency)
        return rows_outcome(rows, columns, latency)

    def explain_text(self, sql: str) -> Optional[str]:
        outcome = self.execute_text(f"EXPLAIN {sql}")
        if outcome.status != "rows" or not outcome.rows:
            return None
        return "\n".join(str(r[0]) for r in outcome.rows)

    def _drop_connection(self):
        if self._conn is not None:
            try:
                self._conn.close()
            finally:
                self._conn = None

    def close(self):
        self._drop_connection()


class RecordingExecutor(Executor):
    """Wraps a live executor and appends fixture records for each execution."""

    def __init__(self, inner: Executor, sink):
        self.inner = inner
        self.sink = sink  # callable(record dict)
        self.endpoint_id = inner.endpoint_id
        self.dialect = inner.dialect

    def execute_text(self, sql: str) -> ExecOutcome:
        outcome = self.inner.execute_text(sql)
        plan = None
        if outcome.status == "rows" and sql.lstrip().upper().startswith(("SELECT", "(")):
            plan = self.inner.explain_text(sql)
        if plan is not None:
            outcome = ExecOutcome(
                "rows", outcome.rows, outcome.column_types,
                latency=outcome.latency, plan_text=plan,
            )
        self.sink(record_from_outcome(self.endpoint_id, sql, outcome))
        return outcome

    def explain_text(self, sql: str) -> Optional[str]:
        return self.inner.explain_text(sql)

    def close(self):
        self.inner.close()


@dataclass
class EndpointConfig:
    kind: str  # fixture | postgresql | questdb | risingwave
    endpoint_id: str = ""
    host: str = "localhost"
    port: int = 5432
    user: str = "postgres"
    database: str = "postgres"
    dialect: str = ""
    fixtures: str = ""
    timeout: float = 30.0
    password_env: str = ""
    explain: bool = False  # plan fingerprinting opt-in (reference is always on)

    def resolved_dialect(self) -> Dialect:
        name = self.dialect or {"postgresql": "postgresql", "questdb": "questdb",
                                "risingwave": "risingwave"}.get(self.kind, "")
        if name not in DIALECTS:
            raise CampaignError(f"unknown dialect {name!r} for endpoint {self.endpoint_id!r}")
        return DIALECTS[name]


def make_executor(cfg: EndpointConfig, store: FixtureStore = None) -> Executor:
    import os

    dialect = cfg.resolved_dialect()
    if cfg.kind == "fixture":
        if store is None:
            if not cfg.fixtures:
                raise CampaignError(f"endpoint {cfg.endpoint_id!r} needs a fixtures path")
            store = FixtureStore.load(cfg.fixtures)
        return FixtureExecutor(store, cfg.endpoint_id, dialect)
    password = os.environ.get(cfg.password_env) if cfg.password_env else None
    return LiveExecutor(
        cfg.endpoint_id, dialect, cfg.host, cfg.port, cfg.user, cfg.database,
        password=password, timeout=cfg.timeout,
    )
