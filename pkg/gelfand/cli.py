# gelfand/cli.py
"""
Command-line front end.

Commands:
- verify CONFIG         run verification suites (CONFIG: JSON file or catalog name)
- norms                 pivot/plus/minus/Z+/Z- norms of a vector
- decompose             spectral split at a cut, with its verification residuals
- split KIND            pivot, canonical or optimal splits of user vectors
- catalog list          named instances
- runs                  recent runs stored in the ledger

Exit codes: 0 pass, 1 a suite failed, 2 usage or input error.
"""

import argparse
import json
import logging
import os
import sys
from typing import List, Optional

from config import settings
from gelfand import catalog, db, decomp, suites, triple, zspace
from gelfand.core import CoeffVector, pivot_norm, vector_from_json, vector_to_json
from gelfand.errors import GelfandError, ParseError
from gelfand.triple import QuasiTriple

logger = logging.getLogger("cli")
logger.setLevel(logging.INFO)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


# -------------------------
# Input helpers
# -------------------------
def _read_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def load_triple(source: str) -> QuasiTriple:
    """A path to triple JSON, otherwise a catalog name."""
    if os.path.isfile(source):
        return triple.triple_from_json(_read_json(source))
    return catalog.get_instance(source).triple


def load_vector(path: str, T: QuasiTriple) -> CoeffVector:
    v = vector_from_json(_read_json(path))
    if v.index_set != T.index_set:
        raise ParseError(f"vector lives on {v.index_set.label}, triple on {T.index_set.label}")
    return v


def _emit(obj, path: Optional[str] = None) -> None:
    text = json.dumps(obj, default=str, indent=2)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        logger.info(f"wrote {path}")
    else:
        print(text)


# -------------------------
# Commands
# -------------------------
def cmd_verify(args) -> int:
    if os.path.isfile(args.config):
        raw = _read_json(args.config)
    else:
        raw = {"triple": args.config}
    if not isinstance(raw, dict):
        raise ParseError("verify config must be a JSON object")
    raw = dict(raw)
    for key in ("seed", "samples", "suites", "workers"):
        value = getattr(args, key)
        if value is not None:
            raw[key] = value
    config = suites.load_config(raw)
    report = suites.run_verification(config)

    if args.report:
        _emit(report, args.report)
    if args.csv:
        count = suites.write_residual_csv(report, args.csv)
        logger.info(f"wrote {count} residual rows to {args.csv}")
    if args.ledger:
        db.init_db(args.ledger)
        run_id = db.record_run(report)
        logger.info(f"recorded run {run_id}")
    if args.text or not args.report:
        print(suites.render_report_text(report))
    return EXIT_OK if report["ok"] else EXIT_FAIL


def cmd_norms(args) -> int:
    T = load_triple(args.triple)
    v = load_vector(args.vector, T)
    _emit({
        "pivot": pivot_norm(v),
        "plus": triple.plus_norm(T, v),
        "minus": triple.minus_norm(T, v),
        "z_plus": zspace.z_plus_norm(T, v),
        "z_minus": zspace.z_minus_norm(T, v),
    })
    return EXIT_OK


def cmd_decompose(args) -> int:
    T = load_triple(args.triple)
    split = decomp.decompose(T, args.cut)
    samples = args.samples or getattr(settings, "DEFAULT_SAMPLES", 1000)
    residuals = decomp.verify_decomposition(split, T, samples, args.seed, args.workers)
    report = decomp.split_report(split, residuals)
    _emit(report, args.report)
    if args.csv:
        wrapped = {"suites": [{"name": "decomposition", "details": residuals}]}
        suites.write_residual_csv(wrapped, args.csv)
    return EXIT_OK if residuals["ok"] else EXIT_FAIL


def cmd_split(args) -> int:
    T = load_triple(args.triple)
    if args.kind == "pivot":
        x = load_vector(args.vector, T)
        f, g = triple.pivot_split(T, x)
        out = {"f": vector_to_json(f), "g": vector_to_json(g),
               "plus_norm_f": triple.plus_norm(T, f), "minus_norm_g": triple.minus_norm(T, g)}
    elif args.kind == "canonical":
        h = zspace.canonical_split(T, load_vector(args.vector, T))
        out = zspace.zminus_to_json(h)
        out["z_minus_norm"] = zspace.z_minus_norm(T, h)
    else:
        f = load_vector(args.f, T)
        g = load_vector(args.g, T)
        z, value = zspace.optimal_split(T, f, g)
        out = {"z": vector_to_json(z), "value": value,
               "z_minus_norm": zspace.z_minus_norm(T, zspace.ZMinusElement(f, g))}
    _emit(out, args.report)
    return EXIT_OK


def cmd_catalog(args) -> int:
    _emit(catalog.list_instances())
    return EXIT_OK


def cmd_runs(args) -> int:
    db.init_db(args.ledger)
    if args.run is not None:
        _emit(db.get_suite_rows(args.run))
    else:
        _emit(db.get_runs(args.limit))
    return EXIT_OK


# -------------------------
# Parser
# -------------------------
def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gelfand", description="Quasi Gelfand triple toolkit")
    ap.add_argument("--verbose", action="store_true", help="debug logging")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("config", help="config JSON path or catalog instance name")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--suites", default=None, help="comma separated suite names or 'all'")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--report", default=None, help="write the JSON report here")
    p.add_argument("--csv", default=None, help="write the residual table here")
    p.add_argument("--ledger", default=None, help="database URL to record the run in")
    p.add_argument("--text", action="store_true", help="print the text report as well")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("norms", help="all five norms of a vector")
    p.add_argument("--triple", required=True, help="triple JSON path or catalog name")
    p.add_argument("--vector", required=True, help="vector JSON path")
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("decompose", help="spectral split at a cut")
    p.add_argument("--triple", required=True)
    p.add_argument("--cut", default="0:1", help="intervals on the sqrt-spectrum scale, e.g. '0:1'")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=getattr(settings, "DEFAULT_SEED", 0))
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--report", default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("split", help="pivot, canonical or optimal splits")
    p.add_argument("kind", choices=["pivot", "canonical", "optimal"])
    p.add_argument("--triple", required=True)
    p.add_argument("--vector", default=None, help="vector JSON (pivot, canonical)")
    p.add_argument("--f", default=None, help="plus part JSON (optimal)")
    p.add_argument("--g", default=None, help="minus part JSON (optimal)")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("catalog", help="named instances")
    p.add_argument("action", choices=["list"])
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("runs", help="recent ledger runs")
    p.add_argument("--ledger", default=None, help="database URL (default GELFAND_LEDGER_URL)")
    p.add_argument("--limit", type=int, default=20)
    p.add_argument("--run", type=int, default=None, help="show the suite rows of one run")
    p.set_defaults(func=cmd_runs)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG, format="%(asctime)s %(name)s %(levelname)s %(message)s")

    if args.command == "split":
        needed = ["f", "g"] if args.kind == "optimal" else ["vector"]
        missing = [n for n in needed if getattr(args, n) is None]
        if missing:
            ap.error(f"split {args.kind} needs --{' --'.join(missing)}")

    try:
        return args.func(args)
    except GelfandError as e:
        print(f"error: {e.__class__.__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as e:
        print(f"error: ParseError: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e.__class__.__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE
