"""On-disk cache of analysis results ("dumps") and the corpus index.

Layout of a cache directory::

    <cache>/<module>.<domain>.dump
    <cache>/index.txt

Both files are line-oriented. The first line names the format and its version;
every other line is one term in source syntax terminated by a full stop. The
fields are documented in ``docs/cache-format.md``.
"""

from __future__ import annotations

import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .analysis import (
    AnalysisConfig,
    AnalysisResult,
    AnalysisTriple,
    EntryPattern,
    ImportsDB,
    analyze,
)
from .domains import make_domain
from .domains.base import AbstractSubst, Domain
from .domains.shapes import Shapes
from .domains.shfr import ShFr
from .domains.types import TypeDef, TypeTable
from .lang import HASH_ALGORITHM, Module, ModuleError, PredId, base_vars, load_module
from .matcher import CorpusModule
from .reader import ParseError, Reader
from .terms import Str, Struct, Term, format_term, make_list

DUMP_VERSION = 1
INDEX_VERSION = 1
DUMP_MAGIC = f"%semsearch-dump v{DUMP_VERSION} {HASH_ALGORITHM}"
INDEX_MAGIC = f"%semsearch-index v{INDEX_VERSION}"
INDEX_FILE = "index.txt"


class StoreError(Exception):
    pass


class MissingDump(StoreError):
    pass


class CorruptDump(StoreError):
    pass


class StaleDump(StoreError):
    def __init__(self, message: str, result: AnalysisResult):
        super().__init__(message)
        self.result = result


def dump_path(cache_dir, module: str, domain_id: str) -> Path:
    return Path(cache_dir) / f"{module}.{domain_id}.dump"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atom(x) -> Struct:
    return Struct(x) if isinstance(x, int) else Struct(str(x))


def _line(t: Term) -> str:
    return format_term(t) + ".\n"


# -- payload encoding ----------------------------------------------------------


def encode_subst(a: AbstractSubst) -> Term:
    if a.is_bottom:
        return Struct("bottom")
    if a.domain == "shfr":
        pos = {v: i for i, v in enumerate(a.vars)}
        sh, fr = a.payload
        groups = sorted(sorted(pos[v] for v in g) for g in sh)
        return Struct("shfr", (make_list([make_list([Struct(i) for i in g]) for g in groups]),
                               make_list([Struct(pos[v]) for v in a.vars if v in fr])))
    return Struct("shapes", (make_list([_atom(t) for t in a.payload]),))


def _ints(t: Term) -> list[int]:
    out = []
    for x in _items(t):
        if not (isinstance(x, Struct) and isinstance(x.functor, int) and not x.args):
            raise CorruptDump(f"expected an integer, got {format_term(x)}")
        out.append(x.functor)
    return out


def _items(t: Term) -> list[Term]:
    out = []
    while isinstance(t, Struct) and t.functor == "." and len(t.args) == 2:
        out.append(t.args[0])
        t = t.args[1]
    if t != Struct("[]"):
        raise CorruptDump(f"expected a list, got {format_term(t)}")
    return out


def decode_subst(t: Term, domain: Domain, arity: int) -> AbstractSubst:
    vars = base_vars(arity)
    if t == Struct("bottom"):
        return domain.bottom(vars)
    if isinstance(t, Struct) and t.functor == "shfr" and len(t.args) == 2 and isinstance(domain, ShFr):
        groups = [frozenset(vars[i] for i in _ints(g)) for g in _items(t.args[0])]
        free = [vars[i] for i in _ints(t.args[1])]
        return domain.element(vars, groups, free)
    if isinstance(t, Struct) and t.functor == "shapes" and len(t.args) == 1 and isinstance(domain, Shapes):
        names = [str(x.functor) for x in _items(t.args[0])]
        if len(names) != arity:
            raise CorruptDump("type list does not match the arity")
        for n in names:
            if n not in ("term", "bot") and n not in domain.table.defs:
                raise CorruptDump(f"undefined type {n}")
        return AbstractSubst("shapes", vars, tuple(names))
    raise CorruptDump(f"bad abstract substitution {format_term(t)}")


def encode_typedef(name: str, declared: bool, d: TypeDef) -> Term:
    cases = [Struct("case", (_atom(f), Struct(n), make_list([_atom(a) for a in args])))
             for (f, n), args in d.cases]
    return Struct("type", (_atom(name), Struct("declared" if declared else "synth"),
                           make_list([Struct(x) for x in sorted(d.leaves)]), make_list(cases)))


def decode_typedef(t: Term) -> tuple[str, bool, TypeDef]:
    name, kind, leaves, cases = t.args
    cs = {}
    for c in _items(cases):
        f, n, args = c.args
        cs[(f.functor, n.functor)] = tuple(str(a.functor) for a in _items(args))
    d = TypeDef.make([str(x.functor) for x in _items(leaves)], cs)
    return str(name.functor), kind.functor == "declared", d


# -- dumps -----------------------------------------------------------------------


def source_timestamp(path: Optional[str]) -> int:
    if os.environ.get("SOURCE_DATE_EPOCH"):
        return int(os.environ["SOURCE_DATE_EPOCH"])
    if path and os.path.exists(path):
        return int(os.stat(path).st_mtime)
    return 0


def render_dump(result: AnalysisResult, timestamp: int = 0) -> str:
    out = [DUMP_MAGIC + "\n"]
    out.append(_line(Struct("module", (_atom(result.module),))))
    out.append(_line(Struct("source", (_atom(result.source_hash),))))
    out.append(_line(Struct("domain", (_atom(result.domain_id),))))
    out.append(_line(Struct("created", (Struct(int(timestamp)),))))
    for name, declared, d in result.types:
        out.append(_line(encode_typedef(name, declared, d)))
    for e in result.entries:
        out.append(_line(Struct("entry", (_atom(e.pred.name), Struct(e.pred.arity), encode_subst(e.call)))))
    for t in result.triples:
        out.append(_line(Struct("triple", (_atom(t.pred.name), Struct(t.pred.arity),
                                           encode_subst(t.call), encode_subst(t.success)))))
    out.append("%end\n")
    return "".join(out)


def parse_dump(text: str, where: str = "<dump>") -> AnalysisResult:
    lines = text.split("\n", 1)
    if not lines or lines[0].strip() != DUMP_MAGIC:
        raise CorruptDump(f"{where}: unsupported or missing header (want {DUMP_MAGIC!r})")
    if not text.rstrip("\n").endswith("%end"):
        raise CorruptDump(f"{where}: truncated dump")
    try:
        terms = [rc.term for rc in Reader(lines[1]).read_all()]
    except ParseError as e:
        raise CorruptDump(f"{where}: {e}") from None
    head: dict = {}
    types, entries, triples = [], [], []
    try:
        for t in terms:
            if not isinstance(t, Struct):
                raise CorruptDump(f"{where}: unexpected {format_term(t)}")
            if t.functor in ("module", "source", "domain", "created") and len(t.args) == 1:
                head[t.functor] = t.args[0].functor
            elif t.functor == "type" and len(t.args) == 4:
                types.append(decode_typedef(t))
            elif t.functor == "entry" and len(t.args) == 3:
                entries.append(t)
            elif t.functor == "triple" and len(t.args) == 4:
                triples.append(t)
            else:
                raise CorruptDump(f"{where}: unexpected {format_term(t)}")
        for k in ("module", "source", "domain"):
            if k not in head:
                raise CorruptDump(f"{where}: missing {k} line")
        module, domain_id = str(head["module"]), str(head["domain"])
        if domain_id == "shapes":
            table = TypeTable(AnalysisConfig().widening_depth)
            for name, declared, d in types:
                (table.declare if declared else table.define)(name, d)
            domain = Shapes(table)
        else:
            domain = make_domain(domain_id)
        ents = [EntryPattern(PredId(module, str(e.args[0].functor), e.args[1].functor),
                             decode_subst(e.args[2], domain, e.args[1].functor)) for e in entries]
        trs = []
        for t in triples:
            name, n = str(t.args[0].functor), t.args[1].functor
            trs.append(AnalysisTriple(PredId(module, name, n), Struct(name, base_vars(n)),
                                      decode_subst(t.args[2], domain, n), decode_subst(t.args[3], domain, n)))
    except (AttributeError, ValueError, TypeError, IndexError) as e:
        raise CorruptDump(f"{where}: malformed content ({e})") from None
    return AnalysisResult(module, str(head["source"]), domain_id, ents, trs, domain, 0, tuple(types))


def save_analysis(result: AnalysisResult, cache_dir, timestamp: Optional[int] = None) -> Path:
    path = dump_path(cache_dir, result.module, result.domain_id)
    _atomic_write(path, render_dump(result, 0 if timestamp is None else timestamp))
    return path


def load_analysis(module: str, domain_id: str, cache_dir, expected_hash: Optional[str] = None) -> AnalysisResult:
    """Read a dump; raises ``StaleDump`` (carrying the result) when the source hash differs."""
    path = dump_path(cache_dir, module, domain_id)
    if not path.exists():
        raise MissingDump(f"no dump for {module} ({domain_id}) in {cache_dir}")
    result = parse_dump(path.read_text(encoding="utf-8"), str(path))
    if result.module != module or result.domain_id != domain_id:
        raise CorruptDump(f"{path}: dump is for {result.module} ({result.domain_id})")
    if expected_hash is not None and result.source_hash != expected_hash:
        raise StaleDump(f"{path}: source changed since indexing", result)
    return result


# -- corpus index ----------------------------------------------------------------------


@dataclass
class IndexEntry:
    module: str
    path: str
    source_hash: str
    domains: tuple
    exports: tuple  # (name, arity)
    keywords: tuple  # doc words
    dump_bytes: tuple = ()  # per domain, same order as ``domains``
    seconds: dict = field(default_factory=dict, compare=False)


@dataclass
class CorpusIndex:
    root: str
    entries: list = field(default_factory=list)
    failures: list = field(default_factory=list)  # (path, message)

    def get(self, module: str) -> Optional[IndexEntry]:
        return next((e for e in self.entries if e.module == module), None)


def _doc_keywords(m: Module) -> tuple:
    words = []
    for a in m.assertions:
        for w in (a.doc or "").lower().replace(",", " ").replace(".", " ").split():
            if w not in words:
                words.append(w)
    return tuple(words)


def render_index(index: CorpusIndex) -> str:
    out = [INDEX_MAGIC + "\n"]
    for e in index.entries:
        out.append(_line(Struct("module", (
            _atom(e.module), Str(e.path), _atom(e.source_hash),
            make_list([_atom(d) for d in e.domains]),
            make_list([Struct("/", (_atom(n), Struct(a))) for n, a in e.exports]),
            make_list([_atom(w) for w in e.keywords]),
            make_list([Struct(b) for b in e.dump_bytes]),
        ))))
    for p, msg in index.failures:
        out.append(_line(Struct("failed", (Str(p), Str(msg)))))
    return "".join(out)


def parse_index(text: str, root: str) -> CorpusIndex:
    lines = text.split("\n", 1)
    if not lines or lines[0].strip() != INDEX_MAGIC:
        raise CorruptDump(f"{root}/{INDEX_FILE}: unsupported or missing header")
    idx = CorpusIndex(root)
    try:
        for rc in Reader(lines[1] if len(lines) > 1 else "").read_all():
            t = rc.term
            if t.functor == "module":
                name, path, h, doms, exps, kws, sizes = t.args
                idx.entries.append(IndexEntry(
                    str(name.functor), path.text, str(h.functor),
                    tuple(str(d.functor) for d in _items(doms)),
                    tuple((str(x.args[0].functor), x.args[1].functor) for x in _items(exps)),
                    tuple(str(w.functor) for w in _items(kws)),
                    tuple(_ints(sizes))))
            elif t.functor == "failed":
                idx.failures.append((t.args[0].text, t.args[1].text))
    except (ParseError, AttributeError, ValueError) as e:
        raise CorruptDump(f"{root}/{INDEX_FILE}: {e}") from None
    return idx


def corpus_files(paths: Iterable) -> list[Path]:
    """``.pl`` files named directly or found below directories, in sorted order."""
    files: list[Path] = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            files.extend(sorted(p.rglob("*.pl")))
        elif p.exists():
            files.append(p)
        else:
            raise FileNotFoundError(str(p))
    seen, out = set(), []
    for f in files:
        r = f.resolve()
        if r not in seen:
            seen.add(r)
            out.append(f)
    return out


def imports_for(module: Module, by_name: dict) -> Optional[ImportsDB]:
    if not module.imports:
        return None
    return ImportsDB.from_modules([by_name[n] for n in module.imports if n in by_name])


def index_corpus(paths: Sequence, domains: Sequence[str], cache_dir,
                 config: AnalysisConfig = AnalysisConfig()) -> CorpusIndex:
    """Parse, analyze per domain and dump every module; per-module failures are recorded."""
    cache = Path(cache_dir)
    try:
        cache.mkdir(parents=True, exist_ok=True)
        probe = tempfile.NamedTemporaryFile(dir=cache, delete=True)
        probe.close()
    except OSError as e:
        raise StoreError(f"cache directory {cache} is not writable: {e}") from None
    index = CorpusIndex(str(cache))
    modules: list[Module] = []
    by_name: dict[str, Module] = {}
    for f in corpus_files(paths):
        try:
            m = load_module(f)
        except (ParseError, ModuleError, UnicodeDecodeError) as e:
            index.failures.append((str(f), f"parse error: {e}"))
            continue
        if m.name in by_name:
            index.failures.append((str(f), f"duplicate module name {m.name}"))
            continue
        by_name[m.name] = m
        modules.append(m)
    for m in modules:
        imports = imports_for(m, by_name)
        sizes, seconds, done = [], {}, []
        try:
            for d in domains:
                t0 = time.perf_counter()
                r = analyze(m, d, imports_db=imports, config=config)
                p = save_analysis(r, cache, source_timestamp(m.path))
                seconds[d] = time.perf_counter() - t0
                sizes.append(p.stat().st_size)
                done.append(d)
        except Exception as e:  # one bad module must not abort the corpus
            index.failures.append((str(m.path), f"analysis error: {type(e).__name__}: {e}"))
            continue
        index.entries.append(IndexEntry(m.name, str(Path(m.path).resolve()), m.source_hash, tuple(done),
                                        tuple(p.key for p in m.exports), _doc_keywords(m),
                                        tuple(sizes), seconds))
    _atomic_write(cache / INDEX_FILE, render_index(index))
    return index


def read_index(cache_dir) -> CorpusIndex:
    path = Path(cache_dir) / INDEX_FILE
    if not path.exists():
        raise MissingDump(f"no index in {cache_dir}")
    return parse_index(path.read_text(encoding="utf-8"), str(cache_dir))


# -- store handle for findp -----------------------------------------------------------


class Store:
    """Read side of a cache directory, with loaded results kept in memory."""

    def __init__(self, cache_dir, config: AnalysisConfig = AnalysisConfig()):
        self.cache_dir = Path(cache_dir)
        self.config = config
        self._mem: dict[tuple, AnalysisResult] = {}
        self._modules: dict[str, tuple] = {}  # path -> (mtime, Module)
        self.reanalyzed: list[tuple[str, str]] = []

    def index(self) -> CorpusIndex:
        return read_index(self.cache_dir)

    def _module(self, path: str) -> Module:
        mtime = os.stat(path).st_mtime_ns
        hit = self._modules.get(path)
        if hit and hit[0] == mtime:
            return hit[1]
        m = load_module(path)
        self._modules[path] = (mtime, m)
        return m

    def result(self, module: Module, domain_id: str, imports: Optional[ImportsDB]) -> AnalysisResult:
        key = (module.name, domain_id, module.source_hash)
        if key in self._mem:
            return self._mem[key]
        try:
            r = load_analysis(module.name, domain_id, self.cache_dir, module.source_hash)
        except StaleDump:
            r = analyze(module, domain_id, imports_db=imports, config=self.config)
            save_analysis(r, self.cache_dir, source_timestamp(module.path))
            self.reanalyzed.append((module.name, domain_id))
        self._mem[key] = r
        return r

    def corpus(self, domains: Sequence[str]) -> list[CorpusModule]:
        idx = self.index()
        mods: list[Module] = []
        for e in idx.entries:
            try:
                mods.append(self._module(e.path))
            except (OSError, ParseError, ModuleError):
                continue  # source vanished or broke after indexing
        by_name = {m.name: m for m in mods}
        out = []
        for m, e in zip(mods, [x for x in idx.entries if x.module in by_name]):
            imports = imports_for(m, by_name)
            results = {d: self.result(m, d, imports) for d in domains if d in e.domains}
            out.append(CorpusModule(m, results, imports))
        out.sort(key=lambda cm: cm.module.name)
        return out
