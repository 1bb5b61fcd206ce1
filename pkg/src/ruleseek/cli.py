"""Command-line interface.

Verbs: index, rules (load/validate), search, infer, compile, serve.
Config precedence: flags > RULESEEK_* environment variables > --config JSON
file > built-in defaults.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Dict, List, Optional

from .config import Config, load_config
from .corpus import Corpus
from .engine import EngineNotReady, RuleValidationError, SearchEngine
from .inference import backward_chain, forward_chain
from .rules import RuleBase, RuleSyntaxError, validate


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--corpus-dir", dest="corpus_dir")
    parser.add_argument("--rules-file", "--rules", dest="rules_file")
    parser.add_argument("--index-snapshot", dest="index_snapshot")
    parser.add_argument("--cache-path", dest="cache_path")
    parser.add_argument("--no-cache", action="store_true", help="disable the compiled-rule cache")
    parser.add_argument("--theta", type=float)
    parser.add_argument("--tau", type=float)
    parser.add_argument("--max-depth", dest="max_depth", type=int)
    parser.add_argument("--strategy")
    parser.add_argument("--top-k", dest="top_k", type=int)
    parser.add_argument("--direction")
    parser.add_argument("--port", type=int)


_CONFIG_KEYS = (
    "corpus_dir",
    "rules_file",
    "index_snapshot",
    "cache_path",
    "theta",
    "tau",
    "max_depth",
    "strategy",
    "top_k",
    "direction",
    "port",
)


def _config_from_args(args: argparse.Namespace) -> Config:
    overrides: Dict[str, object] = {}
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "no_cache", False):
        overrides["cache_enabled"] = False
    return load_config(path=getattr(args, "config", None), overrides=overrides)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def cmd_index(args: argparse.Namespace) -> int:
    corpus = Corpus()
    doc_ids = corpus.ingest_directory(args.directory)
    print(f"indexed {len(doc_ids)} documents from {args.directory}")
    if args.snapshot:
        corpus.save_snapshot(args.snapshot)
        print(f"snapshot written to {args.snapshot}")
    return 0


def cmd_rules(args: argparse.Namespace) -> int:
    try:
        rule_base = RuleBase.from_text(_read(args.file))
    except RuleSyntaxError as exc:
        print(f"syntax error: {exc}", file=sys.stderr)
        return 1
    report = validate(rule_base)
    for error in report.errors:
        print(f"error: {error}", file=sys.stderr)
    for warning in report.warnings:
        print(f"warning: {warning}")
    if args.action == "validate" or report.errors:
        print(f"{len(rule_base)} rules, {len(report.chain_segments)} chain segment(s), version {rule_base.version_hash[:12]}")
        return 1 if report.errors else 0
    print(f"loaded {len(rule_base)} rules, version {rule_base.version_hash[:12]}")
    return 0


def _engine_for(args: argparse.Namespace) -> SearchEngine:
    config = _config_from_args(args)
    engine = SearchEngine.from_config(config)
    return engine


def cmd_search(args: argparse.Namespace) -> int:
    engine = _engine_for(args)
    result, meta = engine.search(args.session, " ".join(args.terms), args.direction)
    if args.format == "structured":
        print(json.dumps({"result": result.to_canonical_dict(), "meta": meta}, indent=2, sort_keys=True))
    else:
        print(result.render_text())
    return 0


def _parse_facts_file(path: str) -> Dict[str, float]:
    facts: Dict[str, float] = {}
    for line in _read(path).splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        confidence = 1.0
        if line.endswith("]") and "[" in line:
            line, _, conf_part = line.rpartition("[")
            confidence = float(conf_part.rstrip("]"))
        facts[" ".join(line.split())] = confidence
    return facts


def cmd_infer(args: argparse.Namespace) -> int:
    rule_base = RuleBase.from_text(_read(args.rules))
    report = validate(rule_base)
    if report.errors:
        for error in report.errors:
            print(f"error: {error}", file=sys.stderr)
        return 1
    facts = _parse_facts_file(args.facts)
    if args.goal:
        outcome = backward_chain(args.goal, facts, rule_base.rules, max_depth=args.max_depth or 8)
        if outcome.proved:
            print(f"PROVED {outcome.goal!r} confidence={outcome.confidence:g} depth={outcome.depth}")
            for step in outcome.trace.steps:
                print(f"  {step.rule_id}: {step.rule_text} => {step.produced} [{step.confidence:g}]")
        else:
            print(f"NOT PROVED {args.goal!r}; missing: {', '.join(outcome.missing) or '(none)'}")
        return 0 if outcome.proved else 1
    result = forward_chain(
        facts, rule_base.rules, strategy=args.strategy or "rule_order", max_depth=args.max_depth or 8
    )
    for statement in sorted(result.derived):
        fact = result.derived[statement]
        print(f"{statement}  [{fact.confidence:g}]  trace={fact.provenance.trace_id}")
    if not result.derived:
        print("(no derived facts)")
    return 0


def cmd_compile(args: argparse.Namespace) -> int:
    engine = _engine_for(args)
    terms = args.query.split()
    compiled, state = engine.compile_rules(terms, args.direction)
    print(json.dumps(compiled.canonical_dict(), indent=2, sort_keys=True))
    print(f"# cache: {state}", file=sys.stderr)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    engine = _engine_for(args)
    config = engine.config
    app = create_app(engine)
    uvicorn.run(app, host=args.host, port=config.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ruleseek")
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="ingest a directory of documents")
    p_index.add_argument("directory")
    p_index.add_argument("--snapshot", help="write a versioned index snapshot here")
    p_index.set_defaults(func=cmd_index)

    p_rules = sub.add_parser("rules", help="load or validate a rule file")
    p_rules.add_argument("action", choices=["load", "validate"])
    p_rules.add_argument("file")
    p_rules.set_defaults(func=cmd_rules)

    p_search = sub.add_parser("search", help="run a query against corpus + rules")
    _add_config_flags(p_search)
    p_search.add_argument("terms", nargs="+")
    p_search.add_argument("--session", default="cli")
    p_search.add_argument("--format", choices=["text", "structured"], default="text")
    p_search.set_defaults(func=cmd_search)

    p_infer = sub.add_parser("infer", help="forward or backward chaining over a facts file")
    p_infer.add_argument("--facts", required=True)
    p_infer.add_argument("--rules", required=True)
    p_infer.add_argument("--strategy", choices=["rule_order", "specificity"])
    p_infer.add_argument("--max-depth", dest="max_depth", type=int)
    p_infer.add_argument("--goal", help="prove this statement instead of forward chaining")
    p_infer.set_defaults(func=cmd_infer)

    p_compile = sub.add_parser("compile", help="print the compiled rule set for a query")
    _add_config_flags(p_compile)
    p_compile.add_argument("--query", required=True)
    p_compile.set_defaults(func=cmd_compile)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    _add_config_flags(p_serve)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RuleSyntaxError, RuleValidationError, EngineNotReady, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
