"""
Command-line entry point.

  build        ingest N-Triples, build the ESG(s), export them with their metrics
  metrics      recompute report.json and the CSV distributions of an export
  query        look up a term in an export (set, supers, subs, closure)
  export-dot   draw a small export as Graphviz DOT

Exit codes: 0 success, 1 user error, 2 internal error. Failures are printed to
stderr as one JSON object.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional

from root_pipeline import run_build
from stage_tools.audit_tool import configure_logging, get_logger
from stage_tools.config_tool import ConfigFactory, RunConfig
from stage_tools.dot_tool import MAX_DOT_NODES, export_dot, write_dot
from stage_tools.errors import EsgError, InternalError, UnknownEntityError, UserError
from stage_tools.namespace_tool import expand_term, namespace_manager
from stages.EsgStage.exchange import import_esg
from stages.IngestStage.baseclass import Term
from stages.IngestStage.stage import IngestStage
from stages.MetricsStage.stage import MetricsStage
from stages.SelectStage.baseclass import SeedIris
from stages.SelectStage.denylist_factory import DenylistFactory
from stages.SelectStage.stage import apply_denylist

QUERY_OPS = ("set", "supers", "subs", "closure")

logger = get_logger("cli")


def _key_values(pairs: Optional[List[str]], flag: str) -> Optional[Dict[str, str]]:
    if not pairs:
        return None
    values = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise UserError(f"{flag} expects NAME=VALUE, got {pair!r}")
        values[key.strip()] = value.strip()
    return values


def _file_values(path: Optional[str]) -> Dict:
    return ConfigFactory().load(path) if path else {}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="esg", description="Equivalence Set Graphs of RDF knowledge graphs.")
    parser.add_argument("-v", "--verbose", action="store_true", default=None, help="DEBUG logging")
    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build", help="build and export ESGs")
    build.add_argument("-i", "--input", dest="inputs", action="append", help="N-Triples file (.nt or .nt.gz); repeatable")
    build.add_argument("-o", "--output-dir", dest="output_dir")
    build.add_argument("-c", "--config", help="JSON or TOML config file")
    build.add_argument("--mode", choices=("classes", "properties", "both"))
    build.add_argument("--storage", choices=("memory", "disk"))
    build.add_argument("--shared-bnode-scope", action="store_true", default=None)
    build.add_argument("--property-esg", help="prior properties export reused by a classes run")
    build.add_argument("--denylist", dest="denylist_files", action="append", help="extra denylist file; repeatable")
    build.add_argument("--spill-threshold", type=int)
    build.add_argument("--es0-reading", choices=("ies", "des"))
    build.add_argument("--seed", action="append", help=f"override a ground IRI, one of {', '.join(SeedIris.model_fields)}")
    build.add_argument("--prefix", action="append", help="CURIE prefix as NAME=IRI; repeatable")

    metrics = sub.add_parser("metrics", help="recompute the metrics of an export")
    metrics.add_argument("esg_dir")
    metrics.add_argument("-i", "--input", dest="inputs", action="append", required=True, help="the store the ESG was built from")
    metrics.add_argument("-o", "--output-dir", dest="output_dir", help="defaults to the export directory")
    metrics.add_argument("-c", "--config", help="JSON or TOML config file")
    metrics.add_argument("--shared-bnode-scope", action="store_true", default=None)
    metrics.add_argument("--es0-reading", choices=("ies", "des"))

    query = sub.add_parser("query", help="look up a term in an export")
    query.add_argument("esg_dir")
    query.add_argument("term", help="<iri>, bare IRI or CURIE")
    query.add_argument("--op", choices=QUERY_OPS, default="set")
    query.add_argument("-c", "--config", help="JSON or TOML config file (for prefixes)")
    query.add_argument("--prefix", action="append", help="CURIE prefix as NAME=IRI; repeatable")

    dot = sub.add_parser("export-dot", help="write an export as Graphviz DOT")
    dot.add_argument("esg_dir")
    dot.add_argument("-o", "--output", help="target file; stdout when omitted")
    dot.add_argument("--max-nodes", type=int, default=MAX_DOT_NODES)
    return parser


def cmd_build(args) -> int:
    flags = {
        "inputs": args.inputs,
        "output_dir": args.output_dir,
        "mode": args.mode,
        "storage": args.storage,
        "shared_bnode_scope": args.shared_bnode_scope,
        "property_esg": args.property_esg,
        "denylist_files": args.denylist_files,
        "spill_threshold": args.spill_threshold,
        "es0_reading": args.es0_reading,
        "seeds": _key_values(args.seed, "--seed"),
        "prefixes": _key_values(args.prefix, "--prefix"),
        "verbose": args.verbose,
    }
    config = RunConfig.resolve(_file_values(args.config), flags)
    configure_logging(config.verbose)
    if not config.inputs:
        raise UserError("no input files given (use -i or the config's `inputs`)")

    ctx = run_build(config)
    try:
        for mode, report in ctx.reports.items():
            logger.info("%s ESG: %d sets, %d edges -> %s", mode, report.ES, report.E, ctx.outputs[mode])
    finally:
        ctx.close()
    return 0


def cmd_metrics(args) -> int:
    config = RunConfig.resolve(
        _file_values(args.config),
        {"inputs": args.inputs, "shared_bnode_scope": args.shared_bnode_scope, "es0_reading": args.es0_reading, "verbose": args.verbose},
    )
    configure_logging(config.verbose)
    esg_dir = Path(args.esg_dir)
    store = IngestStage.ingest_paths(config.inputs, config.shared_bnode_scope, config.spill_threshold)
    apply_denylist(store, DenylistFactory().get_denylist(config.denylist_files, config.denylist_additions))
    esg = import_esg(esg_dir, terms=store.terms)
    type_closure = {store.terms.find(Term.iri(iri)) for iri in esg.meta.get("type_closure", [])} - {None}
    if not type_closure:
        type_closure = {store.resolve_iri(esg.meta.get("seeds", {}).get("rdf_type", config.seeds.rdf_type))}
    MetricsStage.run(esg, store, Path(args.output_dir) if args.output_dir else esg_dir, type_closure, esg.mode, config.es0_reading)
    return 0


def cmd_query(args) -> int:
    config = RunConfig.resolve(_file_values(args.config), {"prefixes": _key_values(args.prefix, "--prefix"), "verbose": args.verbose})
    configure_logging(config.verbose)
    esg = import_esg(Path(args.esg_dir))
    term = expand_term(args.term, manager=namespace_manager(config.prefixes))
    term_id = esg.terms.find(term)
    if term_id is None or term_id not in esg:
        raise UnknownEntityError(f"not found: {term.n3()}")
    esid = esg.set_of(term_id)
    if args.op == "set":
        result = esg.members(esid)
    elif args.op == "closure":
        result = esg.closure_of(term_id)
    else:
        neighbours = esg.supers(esid) if args.op == "supers" else esg.subs(esid)
        result = set().union(*(esg.members(j) for j in neighbours))
    for lexical in sorted(esg.terms.lexical(t) for t in result):
        print(lexical)
    return 0


def cmd_export_dot(args) -> int:
    esg = import_esg(Path(args.esg_dir))
    if args.output:
        export_dot(esg, Path(args.output), args.max_nodes)
    else:
        write_dot(esg, sys.stdout, args.max_nodes)
    return 0


COMMANDS = {"build": cmd_build, "metrics": cmd_metrics, "query": cmd_query, "export-dot": cmd_export_dot}


def _fail(exc: BaseException, exit_code: int) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": exit_code}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return exit_code


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UserError as exc:
        return _fail(exc, exc.exit_code)
    except InternalError as exc:
        return _fail(exc, exc.exit_code)
    except EsgError as exc:
        return _fail(exc, 2)
    except (OSError, EOFError) as exc:
        return _fail(exc, 1)
    except Exception as exc:  # noqa: BLE001
        logger.exception("unexpected failure")
        return _fail(exc, 2)


if __name__ == "__main__":
    sys.exit(main())
