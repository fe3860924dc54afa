"""Command-line front door: rewrite files of SQL, suggest rules from
examples, manage the rule store, and launch the service.

Exit codes: 0 ok, 1 usage, 2 I/O, 3 config.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .config import load_config
from .engine import rewrite
from .errors import ParseError, SqlRewriteError
from .mdl import MdlConfig
from .parser import parse_query, split_statements
from .rules import parse_rule, rule_from_json, rule_to_json
from .schema import SchemaCatalog
from .sqlgen import serialize
from .store import ConflictError, RuleStore
from .suggest import CostConfig, ExplorerConfig, RewritePair, suggest_rules

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_CONFIG = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sqlrewrite", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_rewrite = sub.add_parser("rewrite", help="rewrite SQL statements")
    p_rewrite.add_argument("--rules", help="rule file (JSON array)")
    p_rewrite.add_argument("--store", help="rule store file")
    p_rewrite.add_argument("--workspace", default="default")
    p_rewrite.add_argument("--server", help="rewrite via a running service URL")
    p_rewrite.add_argument("--schema", help="schema catalog JSON file")
    p_rewrite.add_argument("--dialect", default="generic",
                           choices=("postgres", "mysql", "generic"))
    p_rewrite.add_argument("--explain", action="store_true",
                           help="print the rewrite trace as JSON on stderr")
    p_rewrite.add_argument("--in", dest="input", help="input file (default stdin)")
    p_rewrite.add_argument("--max-steps", type=int, default=64)

    p_suggest = sub.add_parser("suggest", help="suggest rules from example pairs")
    p_suggest.add_argument("--examples", required=True,
                           help="JSON array of {original, rewritten}")
    p_suggest.add_argument("--strategy", default="mpn",
                           help="bf | khn:K | mpn:M")
    p_suggest.add_argument("--mdl", help="base,elem_weight,set_weight")
    p_suggest.add_argument("--beta", type=float, default=1.0)
    p_suggest.add_argument("--workload", help="JSON array of SQL strings")
    p_suggest.add_argument("--out", help="write the report here instead of stdout")
    p_suggest.add_argument("--dialect", default="generic",
                           choices=("postgres", "mysql", "generic"))

    p_rules = sub.add_parser("rules", help="manage the rule store")
    p_rules.add_argument("--store", required=True, help="rule store file")
    rules_sub = p_rules.add_subparsers(dest="rules_command", required=True)
    p_add = rules_sub.add_parser("add")
    p_add.add_argument("--name", default="")
    p_add.add_argument("--rule", required=True, help="rule source text")
    p_add.add_argument("--priority", type=int, default=0)
    p_add.add_argument("--workspace", default="default")
    p_list = rules_sub.add_parser("list")
    p_list.add_argument("--workspace")
    p_delete = rules_sub.add_parser("delete")
    p_delete.add_argument("--id", type=int, required=True)
    p_import = rules_sub.add_parser("import")
    p_import.add_argument("path", nargs="?",
                          help="rule JSON file (default: bundled starter rules)")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--config", help="service config JSON file")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "rewrite":
            return cmd_rewrite(args)
        if args.command == "suggest":
            return cmd_suggest(args)
        if args.command == "rules":
            return cmd_rules(args)
        if args.command == "serve":
            return cmd_serve(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


# ---------------------------------------------------------------------------


def _load_rules_file(path: str) -> list:
    with open(path, "r", encoding="utf-8") as handle:
        docs = json.load(handle)
    rules = []
    for index, doc in enumerate(docs):
        rule = rule_from_json(doc)
        if not rule.id:
            rule = rule.with_fields(id=index + 1)
        rules.append(rule)
    return rules


def cmd_rewrite(args) -> int:
    text = _read_input(args.input)
    statements = split_statements(text)

    if args.server:
        return _rewrite_remote(args, statements)

    if args.rules:
        rules = _load_rules_file(args.rules)
    elif args.store:
        store = RuleStore(args.store)
        rules = store.rules_for_rewrite(args.workspace)
    else:
        rules = []
    schema = SchemaCatalog.load(args.schema) if args.schema else None

    traces = []
    for statement in statements:
        try:
            query = parse_query(statement, args.dialect)
        except ParseError as exc:
            # Fail-open: unparseable statements pass through unchanged.
            print(statement + ";")
            traces.append({"sql": statement, "warning": str(exc)})
            continue
        result, trace = rewrite(query, rules, schema, args.max_steps)
        print(serialize(result, args.dialect) + ";")
        traces.append(trace.to_json(args.dialect))
    if args.explain:
        print(json.dumps(traces, indent=2), file=sys.stderr)
    return EXIT_OK


def _rewrite_remote(args, statements) -> int:
    import requests

    base = args.server.rstrip("/")
    traces = []
    for statement in statements:
        response = requests.post(
            f"{base}/api/v1/rewrite",
            json={"sql": statement, "workspace": args.workspace,
                  "explain": args.explain},
            timeout=30,
        )
        if response.status_code != 200:
            raise OSError(f"server returned {response.status_code}: {response.text}")
        body = response.json()
        print(body["sql"] + ";")
        traces.append(body.get("trace", {}))
    if args.explain:
        print(json.dumps(traces, indent=2), file=sys.stderr)
    return EXIT_OK


def _read_input(path: str | None) -> str:
    if path:
        return Path(path).read_text(encoding="utf-8")
    return sys.stdin.read()


def cmd_suggest(args) -> int:
    with open(args.examples, "r", encoding="utf-8") as handle:
        docs = json.load(handle)
    try:
        pairs = [
            RewritePair.from_text(d["original"], d["rewritten"], args.dialect)
            for d in docs
        ]
    except ParseError as exc:
        print(f"i/o error: unparseable example: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        explorer = ExplorerConfig.parse(args.strategy)
    except ValueError as exc:
        raise UsageError(str(exc))
    mdl = MdlConfig()
    if args.mdl:
        parts = args.mdl.split(",")
        if len(parts) != 3:
            raise UsageError("--mdl expects base,elem_weight,set_weight")
        mdl = MdlConfig(*(Fraction(p) for p in parts))
    workload = ()
    if args.workload:
        with open(args.workload, "r", encoding="utf-8") as handle:
            workload = tuple(parse_query(q, args.dialect) for q in json.load(handle))
    if args.beta != 1.0:
        raise UsageError("cost-aware suggestion requires a cost provider; "
                         "beta must be 1 on the command line")
    report = suggest_rules(pairs, explorer, mdl,
                           CostConfig(beta=1.0, workload=workload))
    payload = json.dumps(report.to_json(args.dialect), indent=2)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    return EXIT_OK


def cmd_rules(args) -> int:
    store = RuleStore(args.store)
    if args.rules_command == "add":
        try:
            rule = parse_rule(args.rule, name=args.name,
                              priority=args.priority, workspace=args.workspace)
        except SqlRewriteError as exc:
            print(f"i/o error: invalid rule: {exc}", file=sys.stderr)
            return EXIT_IO
        stored = store.add_rule(rule)
        print(json.dumps(rule_to_json(stored), indent=2))
        return EXIT_OK
    if args.rules_command == "list":
        rules = store.list_rules(args.workspace)
        print(json.dumps([rule_to_json(r) for r in rules], indent=2))
        return EXIT_OK
    if args.rules_command == "delete":
        try:
            store.delete_rule(args.id)
        except KeyError as exc:
            print(f"i/o error: {exc}", file=sys.stderr)
            return EXIT_IO
        return EXIT_OK
    if args.rules_command == "import":
        if args.path:
            docs = json.loads(Path(args.path).read_text(encoding="utf-8"))
        else:
            docs = json.loads(
                resources.files("sqlrewrite.data")
                .joinpath("starter_rules.json")
                .read_text(encoding="utf-8")
            )
        count = 0
        for doc in docs:
            doc = dict(doc)
            doc["id"] = 0  # store assigns fresh ids
            try:
                store.add_rule(rule_from_json(doc))
                count += 1
            except (ConflictError, SqlRewriteError) as exc:
                print(f"skipping rule {doc.get('name', '?')}: {exc}",
                      file=sys.stderr)
        print(f"imported {count} rules")
        return EXIT_OK
    raise UsageError(f"unknown rules command {args.rules_command!r}")


def cmd_serve(args) -> int:
    from .service import run_server

    config = load_config(args.config)
    run_server(config)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
