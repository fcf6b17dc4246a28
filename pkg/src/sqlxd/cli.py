"""Command line interface.

Subcommands:
    run      execute a campaign (live / record / replay per config)
    replay   execute a campaign with the mode forced to replay
    probe    classify registry clauses against both endpoints
    map      rewrite target-dialect SQL into reference SQL
    reduce   delta-debug one paired case against the configured endpoints

Exit codes: 0 clean, 1 findings were emitted, 2 operational failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .campaign import (
    CampaignCase,
    _replay_executors,
    _reduce_replay_case,
    parse_config,
    run_campaign,
)
from .errors import CampaignError, SqlxdError
from .executor import make_executor
from .mapping import MappingEngine
from .oracle import Verdict, compare
from .parse import parse_script
from .registry import build_pool, load_registry, probe_all
from .render import render
from .mapping import DEFAULT_RULES
from .sqlast import CANONICAL, DIALECTS, POSTGRESQL


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (CampaignError, SqlxdError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sqlxd", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a campaign")
    _campaign_flags(run)
    run.set_defaults(handler=_cmd_run, force_mode=None)

    replay = sub.add_parser("replay", help="run a replay-mode campaign")
    _campaign_flags(replay)
    replay.set_defaults(handler=_cmd_run, force_mode="replay")

    probe = sub.add_parser("probe", help="probe and classify registry clauses")
    probe.add_argument("--config", required=True)
    probe.add_argument("--registry", help="override the registry path")
    probe.set_defaults(handler=_cmd_probe)

    mapcmd = sub.add_parser("map", help="rewrite target SQL into reference SQL")
    mapcmd.add_argument("--sql", help="statement text; reads stdin when omitted")
    mapcmd.add_argument("--schema", help="DDL script the statements reference")
    mapcmd.add_argument("--show-original", action="store_true",
                        help="also print the aligned target-side statement")
    mapcmd.set_defaults(handler=_cmd_map)

    reduce_cmd = sub.add_parser("reduce", help="reduce one paired case")
    reduce_cmd.add_argument("--config", required=True)
    reduce_cmd.add_argument("--case", required=True,
                            help="JSON file with {name, target: [...], reference: [...]}")
    reduce_cmd.set_defaults(handler=_cmd_reduce)
    return parser


def _campaign_flags(p):
    p.add_argument("--config", required=True, help="campaign config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--queries", type=int)
    p.add_argument("--duration", type=float)
    p.add_argument("--out")
    p.add_argument("--mode", choices=("live", "replay", "record"))
    p.add_argument("--workers", type=int)


def _cmd_run(args) -> int:
    from dataclasses import replace

    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.gen = replace(cfg.gen, seed=args.seed)
    if args.queries is not None:
        cfg.queries, cfg.duration = args.queries, None
    if args.duration is not None:
        cfg.duration, cfg.queries = args.duration, None
    if args.out:
        cfg.out_dir = args.out
    if args.mode:
        cfg.mode = args.mode
    if args.force_mode:
        cfg.mode = args.force_mode
    if args.workers is not None:
        cfg.workers = args.workers
    summary = run_campaign(cfg)
    for key, value in summary.counts().items():
        print(f"{key}: {value}")
    for item in summary.review_queue:
        print(f"review: {item}")
    print(f"reports: {', '.join(summary.report_digests()) or 'none'}")
    print(f"output written to {cfg.out_dir}")
    if summary.aborted:
        print(f"aborted: {summary.aborted}", file=sys.stderr)
        return 2
    return 1 if summary.reports else 0


def _cmd_probe(args) -> int:
    cfg = parse_config(args.config)
    registry_path = args.registry or cfg.registry_path
    if not registry_path:
        raise CampaignError("no registry path (flag --registry or config key registry)")
    descriptors = load_registry(registry_path)
    store = None
    if cfg.fixtures_path:
        from .executor import FixtureStore

        store = FixtureStore.load(cfg.fixtures_path)
    target = make_executor(cfg.target, store)
    reference = make_executor(cfg.reference, store)
    try:
        records = probe_all(descriptors, target, reference)
    finally:
        target.close()
        reference.close()
    pool = build_pool(records, DEFAULT_RULES)
    width = max(len(r.descriptor_id) for r in records)
    for rec in records:
        print(f"{rec.descriptor_id:<{width}}  {rec.status.value}")
    print(f"shared: {len(pool.shared)}  mapped: {len(pool.mapped)}  "
          f"effective: {len(pool.effective())}")
    if pool.warnings:
        print("warning: mappable without a rule, excluded from the pool: "
              + ", ".join(pool.warnings))
    return 0


def _cmd_map(args) -> int:
    text = args.sql if args.sql else sys.stdin.read()
    schema = []
    if args.schema:
        with open(args.schema, "r", encoding="utf-8") as fh:
            schema = parse_script(fh.read())
    engine = MappingEngine(schema=schema)
    for stmt in parse_script(text):
        mq = engine.apply(stmt)
        if args.show_original:
            target_dialect = DIALECTS.get("questdb")
            try:
                print(f"-- target:    {render(mq.original, target_dialect)}")
            except SqlxdError:
                print(f"-- target:    {render(mq.original, CANONICAL)}")
        print(render(mq.mapped, POSTGRESQL) + ";")
        if mq.applied_rules:
            print(f"-- rules: {', '.join(mq.applied_rules)}")
    return 0


def _cmd_reduce(args) -> int:
    cfg = parse_config(args.config)
    with open(args.case, "r", encoding="utf-8") as fh:
        rec = json.loads(fh.read())
    case = CampaignCase(
        rec["name"],
        tuple(s for sql in rec["target"] for s in parse_script(sql)),
        tuple(s for sql in rec["reference"] for s in parse_script(sql)),
    )
    target, reference = _replay_executors(cfg)
    t = _exec(case.target_stmts, target)
    r = _exec(case.reference_stmts, reference)
    from .campaign import _ordered

    verdict = compare(t, r, _ordered(case.query()), cfg.classifier)
    if verdict in (Verdict.EQUAL, Verdict.BOTH_ERROR_CONSISTENT):
        print(f"verdict {verdict.value}: nothing to reduce")
        return 0
    reduced, flaky, _ = _reduce_replay_case(cfg, case, target, reference, verdict)
    print(f"verdict: {verdict.value}{' (flaky)' if flaky else ''}")
    for stmt in reduced.target_stmts:
        print(render(stmt, target.dialect) + ";")
    return 1


def _exec(stmts, executor):
    out = None
    for stmt in stmts:
        out = executor.execute_text(render(stmt, executor.dialect))
    return out


if __name__ == "__main__":
    sys.exit(main())
