"""Command line: ``semsearch index``, ``semsearch find`` and ``semsearch show``.

Exit codes: 0 success, 1 no results, 2 bad input (query or corpus path),
3 missing or unreadable cache, 4 index finished with per-module failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from .analysis import AnalysisConfig
from .domains import DOMAIN_IDS
from .domains.shapes import render_type_literal
from .domains.types import TypeDef
from .lang import base_vars
from .matcher import STATUSES, FindOptions, MatchResult, SoundnessError, findp, parse_query
from .reader import ParseError
from .store import CorruptDump, MissingDump, Store, StoreError, index_corpus, load_analysis
from .terms import Struct, format_atom, format_term

EXIT_OK, EXIT_EMPTY, EXIT_INPUT, EXIT_CACHE, EXIT_PARTIAL = 0, 1, 2, 3, 4
MACHINE_SCHEMA = "semsearch-find/1"
DEFAULT_CACHE = ".semsearch"


def cache_dir(args) -> Path:
    return Path(args.cache or os.environ.get("SEMSEARCH_CACHE") or DEFAULT_CACHE)


def parse_domains(text: str) -> tuple:
    ds = tuple(d.strip() for d in text.split(",") if d.strip())
    bad = [d for d in ds if d not in DOMAIN_IDS]
    if bad or not ds:
        raise ValueError(f"unknown domain(s) {', '.join(bad) or '(none)'}; known: {', '.join(DOMAIN_IDS)}")
    return ds


def _err(msg: str) -> None:
    print(f"semsearch: {msg}", file=sys.stderr)


# -- index --------------------------------------------------------------------------


def cmd_index(args) -> int:
    try:
        domains = parse_domains(args.domains)
    except ValueError as e:
        _err(str(e))
        return EXIT_INPUT
    t0 = time.perf_counter()
    try:
        idx = index_corpus(args.paths, domains, cache_dir(args), AnalysisConfig())
    except FileNotFoundError as e:
        _err(f"no such file or directory: {e}")
        return EXIT_INPUT
    except StoreError as e:
        _err(str(e))
        return EXIT_CACHE
    total_bytes = 0
    for e in idx.entries:
        cells = []
        for d, size in zip(e.domains, e.dump_bytes):
            cells.append(f"{d} {e.seconds.get(d, 0.0):.3f}s {size}B")
            total_bytes += size
        print(f"{e.module:<20} " + "  ".join(cells))
    for path, msg in idx.failures:
        print(f"FAILED {path}: {msg}", file=sys.stderr)
    print(f"indexed {len(idx.entries)} module(s), {len(idx.failures)} failure(s), "
          f"{total_bytes} bytes in {time.perf_counter() - t0:.2f}s -> {cache_dir(args)}")
    if not idx.entries and idx.failures:
        return EXIT_INPUT
    return EXIT_PARTIAL if idx.failures else EXIT_OK


# -- find ------------------------------------------------------------------------------


def read_query_arg(q: str) -> str:
    p = Path(q)
    if "{" not in q and ":-" not in q and p.is_file():
        return p.read_text(encoding="utf-8")
    return q


def machine_lines(results: Sequence[MatchResult]) -> list[str]:
    out = [json.dumps({"schema": MACHINE_SCHEMA, "fields": ["module", "predicate", "arity", "status", "residue"]},
                      sort_keys=True)]
    for r in results:
        residue = [{"condition": str(e.condition), "note": e.note, "status": e.status,
                    "verdicts": {d: v.status for d, v in e.verdicts}} for e in r.residue]
        out.append(json.dumps({"module": r.pred.module, "predicate": r.pred.name, "arity": r.pred.arity,
                               "status": r.status, "residue": residue, "refined": r.refined},
                              sort_keys=True, separators=(",", ":")))
    return out


def human_lines(results: Sequence[MatchResult]) -> list[str]:
    out = []
    for r in results:
        out.append(f"{r.pred}  {r.status}" + ("  (refined)" if r.refined else ""))
        for e in r.residue:
            out.append(f"    {e}")
    return out


def cmd_find(args) -> int:
    try:
        domains = parse_domains(args.domains)
        query = parse_query(read_query_arg(args.query))
    except (ValueError, ParseError) as e:
        _err(f"query error: {e}")
        return EXIT_INPUT
    store = Store(cache_dir(args))
    try:
        corpus = store.corpus(domains)
        opts = FindOptions(domains=domains, refine=args.refine, required_status=args.status,
                           keywords=tuple(args.keyword or ()))
        results = list(findp(query, corpus, opts))
    except (MissingDump, CorruptDump) as e:
        _err(f"cache error: {e}")
        return EXIT_CACHE
    except SoundnessError as e:
        _err(f"internal soundness check failed: {e}")
        return EXIT_INPUT
    lines = machine_lines(results) if args.format == "machine" else human_lines(results)
    if args.format == "human" and not results:
        lines = ["no matching predicates"]
    print("\n".join(lines))
    return EXIT_OK if results else EXIT_EMPTY


# -- show -------------------------------------------------------------------------------


def typedef_clauses(name: str, d: TypeDef) -> list[str]:
    """A synthesized type as regtype clauses in source syntax."""
    out = [f":- regtype {format_atom(name)}/1."]
    for leaf in sorted(d.leaves):
        out.append(f"{format_atom(name)}(X) :- {leaf}(X).")
    for (f, n), args in d.cases:
        vs = base_vars(n)
        head = format_term(Struct(name, (Struct(f, vs),)))
        body = [render_type_literal(a, v.name) for v, a in zip(vs, args) if a != "term"]
        out.append(head + (" :- " + ", ".join(body) if body else "") + ".")
    return out


def show_lines(result) -> list[str]:
    out = []
    dom = result.domain
    for t in result.triples:
        head = format_term(t.head, prec=999)
        call = dom.render(t.call)
        succ = dom.render(t.success)
        out.append(f":- true pred {head} : {call} => {succ}.")
    for name, declared, d in result.types:
        if not declared:
            out.extend(typedef_clauses(name, d))
    return out


def cmd_show(args) -> int:
    if args.domain not in DOMAIN_IDS:
        _err(f"unknown domain {args.domain}")
        return EXIT_INPUT
    try:
        r = load_analysis(args.module, args.domain, cache_dir(args))
    except (MissingDump, CorruptDump) as e:
        _err(str(e))
        return EXIT_CACHE
    print("\n".join(show_lines(r)))
    return EXIT_OK


# -- entry point ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semsearch", description="Semantic search over analyzed logic programs.")
    p.add_argument("--cache", help="cache directory (default: $SEMSEARCH_CACHE or ./.semsearch)")
    sub = p.add_subparsers(dest="command", required=True)

    pi = sub.add_parser("index", help="analyze modules and write dumps")
    pi.add_argument("paths", nargs="+", help="module files or directories searched for *.pl")
    pi.add_argument("--domains", default=",".join(DOMAIN_IDS))
    pi.set_defaults(func=cmd_index)

    pf = sub.add_parser("find", help="run a findp query against the cache")
    pf.add_argument("query", help="query text or a file containing it")
    pf.add_argument("--domains", default=",".join(DOMAIN_IDS))
    pf.add_argument("--status", choices=STATUSES)
    pf.add_argument("--refine", action="store_true", help="reanalyze undecided candidates from the query's calls")
    pf.add_argument("--format", choices=("human", "machine"), default="human")
    pf.add_argument("--keyword", action="append", help="substring required in name or doc (repeatable, ANDed)")
    pf.set_defaults(func=cmd_find)

    ps = sub.add_parser("show", help="print the stored analysis of a module")
    ps.add_argument("module")
    ps.add_argument("--domain", default="shfr")
    ps.set_defaults(func=cmd_show)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
