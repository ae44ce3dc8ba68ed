# stage.py
"""
Streaming N-Triples ingestion into a predicate-indexed, deduplicated triple store.

Lines are parsed one at a time with rdflib's W3C N-Triples parser so that a
malformed line can be skipped and reported with its line number instead of
aborting the whole dump.
"""

import gzip
import io
from contextlib import contextmanager
from pathlib import Path
from typing import BinaryIO, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import rdflib
from rdflib import BNode, Literal, URIRef
from rdflib.plugins.parsers.ntriples import ParseError, W3CNTriplesParser

from stage_tools.audit_tool import emit_audit_entry, get_logger
from stages.IngestStage.baseclass import IngestReport, Term
from stages.IngestStage.terms import TermDictionary

NTRIPLES = "ntriples"
NTRIPLES_GZIP = "ntriples-gzip"
FORMATS = (NTRIPLES, NTRIPLES_GZIP)

_ID_BITS = 40

logger = get_logger("ingest")

Pair = Tuple[int, int]


def _pack(s: int, p: int, o: int) -> int:
    return (((s << _ID_BITS) | p) << _ID_BITS) | o


class TripleStore:
    """
    Graph merge of the ingested sources: every distinct (s, p, o) once, indexed by
    predicate. Mutation happens only while ingesting and applying the denylist;
    afterwards the store is read-only and may be shared between threads.
    """

    def __init__(self, terms: Optional[TermDictionary] = None) -> None:
        self.terms = terms if terms is not None else TermDictionary()
        self.report = IngestReport()
        self._by_predicate: Dict[int, List[Pair]] = {}
        self._keys: set = set()
        # canonical labels for blank nodes, keyed by the parser-scoped node
        self._blank_labels: Dict[str, str] = {}

    # --- construction -------------------------------------------------------

    def add(self, s: int, p: int, o: int) -> bool:
        """Insert a triple; False when it was already present."""
        key = _pack(s, p, o)
        if key in self._keys:
            return False
        self._keys.add(key)
        self._by_predicate.setdefault(p, []).append((s, o))
        return True

    def add_terms(self, s: Term, p: Term, o: Term) -> bool:
        return self.add(self.terms.resolve(s), self.terms.resolve(p), self.terms.resolve(o))

    def discard(self, s: int, p: int, o: int) -> bool:
        key = _pack(s, p, o)
        if key not in self._keys:
            return False
        self._keys.remove(key)
        pairs = self._by_predicate[p]
        pairs.remove((s, o))
        if not pairs:
            del self._by_predicate[p]
        return True

    # --- queries ------------------------------------------------------------

    def triples_with_predicate(self, p: int) -> Sequence[Pair]:
        """All (s, o) pairs stored under predicate `p`, in insertion order (read-only)."""
        return self._by_predicate.get(p, ())

    def predicates(self) -> List[int]:
        return list(self._by_predicate)

    def contains(self, s: int, p: int, o: int) -> bool:
        return _pack(s, p, o) in self._keys

    def resolve(self, term: Term) -> int:
        return self.terms.resolve(term)

    def resolve_iri(self, iri: str) -> int:
        return self.terms.resolve(Term.iri(iri))

    def lookup(self, term_id: int) -> Term:
        return self.terms.lookup(term_id)

    @property
    def triple_count(self) -> int:
        return len(self._keys)

    def __len__(self) -> int:
        return len(self._keys)

    def __iter__(self) -> Iterator[Tuple[int, int, int]]:
        for p, pairs in self._by_predicate.items():
            for s, o in pairs:
                yield s, p, o

    def serialize_triple(self, s: int, p: int, o: int) -> str:
        return f"{self.lookup(s).n3()} {self.lookup(p).n3()} {self.lookup(o).n3()} ."

    def refresh_report(self) -> IngestReport:
        self.report.terms = len(self.terms)
        self.report.predicates = len(self._by_predicate)
        return self.report

    def _blank_term(self, node: BNode) -> Term:
        label = self._blank_labels.get(node)
        if label is None:
            label = f"b{len(self._blank_labels)}"
            self._blank_labels[node] = label
        return Term.blank(label)


class _StoreSink:
    """rdflib sink converting parser nodes into interned terms."""

    def __init__(self, store: TripleStore) -> None:
        self.store = store
        self.added = False

    def triple(self, s, p, o) -> None:
        self.added = self.store.add_terms(self._term(s), self._term(p), self._term(o))

    def _term(self, node) -> Term:
        if isinstance(node, URIRef):
            return Term.iri(str(node))
        if isinstance(node, BNode):
            return self.store._blank_term(node)
        if isinstance(node, Literal):
            return Term.literal(str(node), language=node.language, datatype=str(node.datatype) if node.datatype else None)
        raise ParseError(f"unsupported node type {type(node).__name__}")


class BlankNodeScope(dict):
    """Parser-side label table; one per file unless the scope is shared."""


@contextmanager
def _lexical_literals() -> Iterator[None]:
    """Keep literal lexical forms as written; "01"^^xsd:integer stays distinct from "1"."""
    previous = rdflib.NORMALIZE_LITERALS
    rdflib.NORMALIZE_LITERALS = False
    try:
        yield
    finally:
        rdflib.NORMALIZE_LITERALS = previous


def _parse_lines(
    stream: BinaryIO,
    parser: W3CNTriplesParser,
    sink: _StoreSink,
    scope: BlankNodeScope,
    report: IngestReport,
    source_name: str,
) -> None:
    for lineno, raw in enumerate(stream, start=1):
        try:
            line = raw.decode("utf-8").rstrip("\r\n")
        except UnicodeDecodeError as exc:
            _skip(report, source_name, lineno, f"invalid utf-8: {exc}")
            continue
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        sink.added = None
        parser.line = line
        try:
            parser.parseline(bnode_context=scope)
        except (ParseError, ValueError) as exc:
            _skip(report, source_name, lineno, str(exc))
            continue
        if sink.added is None:
            continue
        report.parsed += 1
        if not sink.added:
            report.deduplicated += 1


def parse_stream(
    source: BinaryIO,
    fmt: str = NTRIPLES,
    store: Optional[TripleStore] = None,
    scope: Optional[BlankNodeScope] = None,
    source_name: str = "<stream>",
) -> TripleStore:
    """
    Parse an N-Triples byte stream into `store` (a fresh one when omitted).

    Malformed lines are skipped, counted and logged with their line number. I/O
    errors propagate; a truncated gzip stream surfaces as OSError.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unsupported format {fmt!r}; expected one of {FORMATS}")
    store = store if store is not None else TripleStore()
    scope = scope if scope is not None else BlankNodeScope()
    stream: BinaryIO = gzip.GzipFile(fileobj=source, mode="rb") if fmt == NTRIPLES_GZIP else source

    sink = _StoreSink(store)
    parser = W3CNTriplesParser(sink=sink, bnode_context=scope)
    report = store.report
    try:
        with _lexical_literals():
            _parse_lines(stream, parser, sink, scope, report, source_name)
    except EOFError as exc:
        raise OSError(f"{source_name}: truncated gzip stream: {exc}") from exc
    report.files.append(source_name)
    store.refresh_report()
    return store


def _skip(report: IngestReport, source_name: str, lineno: int, reason: str) -> None:
    report.skipped += 1
    emit_audit_entry(
        logger,
        {"event": "ingest_line_skipped", "file": source_name, "line": lineno, "reason": reason},
        severity="WARNING",
    )


def format_for_path(path: Path) -> str:
    return NTRIPLES_GZIP if path.suffix == ".gz" else NTRIPLES


class IngestStage:
    @staticmethod
    def ingest_paths(
        paths: Iterable[Path],
        shared_bnode_scope: bool = False,
        spill_threshold: Optional[int] = None,
    ) -> TripleStore:
        """Merge every input file into one store; `.gz` files are decompressed."""
        store = TripleStore(TermDictionary(spill_threshold=spill_threshold))
        shared = BlankNodeScope() if shared_bnode_scope else None
        for path in paths:
            path = Path(path)
            logger.info("Processing %s ..", path)
            with path.open("rb") as f:
                parse_stream(f, format_for_path(path), store=store, scope=shared, source_name=str(path))
        emit_audit_entry(logger, {"event": "ingest_finished", **store.refresh_report().model_dump()})
        return store

    @staticmethod
    def ingest_text(text: str, store: Optional[TripleStore] = None, scope: Optional[BlankNodeScope] = None) -> TripleStore:
        """Convenience for small inline documents."""
        return parse_stream(io.BytesIO(text.encode("utf-8")), NTRIPLES, store=store, scope=scope, source_name="<text>")
