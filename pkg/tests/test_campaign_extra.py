"""Remaining campaign surfaces: review queue, worker fan-out, the reduce
subcommand, and timeout classification."""

import json

from conftest import data_path
from support import StubExecutor
from sqlxd.campaign import CampaignConfig, run_campaign
from sqlxd.cli import main as cli_main
from sqlxd.executor import EndpointConfig, canonical_digest, error_outcome, rows_outcome
from sqlxd.sqlast import POSTGRESQL, QUESTDB


def _fixture_line(endpoint, sql, outcome):
    rec = {"endpoint_id": endpoint, "sql_digest": canonical_digest(sql), "sql_text": sql,
           "status": outcome.status}
    if outcome.status == "rows":
        rec["rows"] = [list(r) for r in outcome.rows]
        rec["column_types"] = list(outcome.column_types)
    else:
        rec["error"] = outcome.error_text
    return json.dumps(rec)


def test_reference_refusal_lands_in_review_queue(tmp_path):
    sql = "SELECT c0 FROM t0"
    cases = tmp_path / "cases.jsonl"
    cases.write_text(json.dumps({"name": "refusal", "target": [sql], "reference": [sql]}) + "\n")
    fixtures = tmp_path / "fx.jsonl"
    fixtures.write_text("\n".join([
        _fixture_line("questdb", sql, rows_outcome([[1]], ["integer"])),
        _fixture_line("postgresql", sql, error_outcome("feature not supported: window frames")),
    ]) + "\n")
    cfg = CampaignConfig(
        target=EndpointConfig(kind="fixture", endpoint_id="questdb", dialect="questdb"),
        reference=EndpointConfig(kind="fixture", endpoint_id="postgresql", dialect="postgresql"),
        mode="replay", cases_path=str(cases), fixtures_path=str(fixtures),
        out_dir=str(tmp_path / "out"),
    )
    summary = run_campaign(cfg)
    assert summary.expected_errors == 1
    assert summary.reports == ()
    assert any("refusal" in item for item in summary.review_queue)


def test_live_workers_share_nothing_and_fill_budget(tmp_path, monkeypatch):
    import sqlxd.campaign as camp
    from sqlxd.executor import FixtureExecutor, FixtureStore

    store = FixtureStore.load(data_path("fixtures", "probe_questdb_postgresql.jsonl"))
    made = []

    def factory(cfg_, worker, sinks):
        if not made:
            made.append("probe")
            return (FixtureExecutor(store, "questdb", QUESTDB),
                    FixtureExecutor(store, "postgresql", POSTGRESQL))
        made.append(worker)
        same = lambda sql: rows_outcome([[1]], ["integer"])
        return (StubExecutor("questdb", QUESTDB, same),
                StubExecutor("postgresql", POSTGRESQL, same))

    monkeypatch.setattr(camp, "_live_executors", factory)
    cfg = CampaignConfig(
        target=EndpointConfig(kind="fixture", endpoint_id="questdb", dialect="questdb"),
        reference=EndpointConfig(kind="fixture", endpoint_id="postgresql", dialect="postgresql"),
        mode="live", queries=30, workers=3, seed=9,
        registry_path=data_path("questdb_registry.jsonl"),
        out_dir=str(tmp_path / "out"),
    )
    summary = run_campaign(cfg)
    assert summary.queries == 30
    assert summary.queries == (summary.equal + summary.logic_discrepancies
                               + summary.internal_errors + summary.expected_errors
                               + summary.both_error_consistent)
    assert len([m for m in made if m != "probe"]) == 3


def test_reduce_subcommand_reports_verdict(tmp_path, capsys):
    case = {
        "name": "null-in-projection",
        "target": ["CREATE TABLE test (c0 INT)", "INSERT INTO test VALUES (NULL)",
                   "SELECT (c0 IN (0, NULL)) FROM test"],
        "reference": ["CREATE TABLE test (c0 INT)", "INSERT INTO test VALUES (NULL)",
                      "SELECT (c0 IN (0, NULL)) FROM test"],
    }
    case_path = tmp_path / "case.json"
    case_path.write_text(json.dumps(case))
    cfg_path = tmp_path / "c.cfg"
    cfg_path.write_text(
        "mode = replay\n"
        "cases = unused\n"
        f"fixtures = {data_path('fixtures', 'listings_fixtures.jsonl')}\n"
        "target.kind = fixture\n"
        "target.endpoint_id = questdb\n"
        "target.dialect = questdb\n"
        "reference.kind = fixture\n"
        "reference.endpoint_id = postgresql\n"
        "reference.dialect = postgresql\n"
    )
    code = cli_main(["reduce", "--config", str(cfg_path), "--case", str(case_path)])
    out = capsys.readouterr().out
    assert code == 1
    assert "logic-discrepancy" in out
    # the referenced table's DDL can never be reduced away; the INSERT can be
    # dropped only because per-statement fixtures are state-blind, which the
    # subcommand documents as a live-endpoint feature
    assert "CREATE TABLE test" in out and "SELECT" in out


def test_timeout_outcome_classified_internal():
    from sqlxd.oracle import ErrorClassifier, Verdict, compare

    target = error_outcome("TIMEOUT")
    reference = rows_outcome([[1]], ["integer"])
    assert ErrorClassifier().classify("TIMEOUT") == "internal"
    assert compare(target, reference) is Verdict.INTERNAL_ERROR


class _ProbeStub(StubExecutor):
    def execute_text(self, sql):
        self.log.append(sql)
        if sql.startswith(("DROP", "CREATE", "INSERT")):
            return rows_outcome([], [])
        return self.responder(sql)


def test_live_mode_installs_probe_schema_and_duration_budget(tmp_path, monkeypatch):
    import sqlxd.campaign as camp

    made = []

    def factory(cfg_, worker, sinks):
        same = lambda sql: rows_outcome([[1]], ["integer"])
        pair = (_ProbeStub("questdb", QUESTDB, same), _ProbeStub("postgresql", POSTGRESQL, same))
        made.append(pair)
        return pair

    monkeypatch.setattr(camp, "_live_executors", factory)
    cfg = CampaignConfig(
        target=EndpointConfig(kind="questdb", endpoint_id="questdb"),
        reference=EndpointConfig(kind="postgresql", endpoint_id="postgresql"),
        mode="live", duration=0.2, seed=3,
        registry_path=data_path("questdb_registry.jsonl"),
        out_dir=str(tmp_path / "out"),
    )
    summary = run_campaign(cfg)
    assert summary.queries > 0
    assert not summary.aborted
    probe_target = made[0][0]
    assert any(s.startswith("CREATE TABLE sqlxd_probe") for s in probe_target.log)
    assert any(s.startswith("INSERT INTO sqlxd_probe") for s in probe_target.log)


def test_worker_connection_loss_aborts_with_partial_summary(tmp_path, monkeypatch):
    import sqlxd.campaign as camp
    from sqlxd.errors import ConnectionLost

    calls = {"n": 0}

    class Dying(_ProbeStub):
        def execute_text(self, sql):
            if sql.startswith("SELECT") or sql.startswith("("):
                calls["n"] += 1
                if calls["n"] > 12:
                    raise ConnectionLost("endpoint went away")
            return super().execute_text(sql)

    def factory(cfg_, worker, sinks):
        same = lambda sql: rows_outcome([[1]], ["integer"])
        return (Dying("questdb", QUESTDB, same), Dying("postgresql", POSTGRESQL, same))

    monkeypatch.setattr(camp, "_live_executors", factory)
    cfg = CampaignConfig(
        target=EndpointConfig(kind="questdb", endpoint_id="questdb"),
        reference=EndpointConfig(kind="postgresql", endpoint_id="postgresql"),
        mode="live", queries=500, seed=3,
        registry_path=data_path("questdb_registry.jsonl"),
        out_dir=str(tmp_path / "out"),
    )
    summary = run_campaign(cfg)
    assert summary.aborted
    assert summary.queries < 500
