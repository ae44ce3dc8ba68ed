"""
Term dictionary: interns RDF terms into dense integer ids in first-seen order.

Entries live in memory until `spill_threshold` terms have been interned; after
that the dictionary moves them into an sqlite term index and keeps only the
blank-node and literal id sets in memory.
"""

from __future__ import annotations

from typing import Dict, Iterator, List, Optional, Set

from stage_tools.audit_tool import get_logger
from stage_tools.errors import UnissuedTermIdError, UnknownTermError
from stage_tools.kv_tool import KeyValueBackend, SqliteTermIndex
from stages.IngestStage.baseclass import Term, TermKind

logger = get_logger("terms")


class TermDictionary:
    def __init__(self, spill_threshold: Optional[int] = None) -> None:
        self.spill_threshold = spill_threshold
        self._ids: Dict[Term, int] = {}
        self._terms: List[Term] = []
        self._count = 0
        self._blanks: Set[int] = set()
        self._literals: Set[int] = set()
        self._backend: Optional[KeyValueBackend] = None
        self._index: Optional[SqliteTermIndex] = None

    @property
    def spilled(self) -> bool:
        return self._index is not None

    def resolve(self, term: Term) -> int:
        """Return the id of `term`, interning it on first sight."""
        term_id = self.find(term)
        if term_id is not None:
            return term_id
        term_id = self._count
        self._count += 1
        if self._index is None:
            self._ids[term] = term_id
            self._terms.append(term)
        else:
            self._index.insert(term_id, term.kind.value, term.lexical)
        if term.kind is TermKind.BLANK:
            self._blanks.add(term_id)
        elif term.kind is TermKind.LITERAL:
            self._literals.add(term_id)
        if self._index is None and self.spill_threshold is not None and self._count > self.spill_threshold:
            self._spill()
        return term_id

    def find(self, term: Term) -> Optional[int]:
        """Id of an already interned term, None when absent."""
        if self._index is None:
            return self._ids.get(term)
        return self._index.find(term.kind.value, term.lexical)

    def require(self, term: Term) -> int:
        term_id = self.find(term)
        if term_id is None:
            raise UnknownTermError(f"term not in dictionary: {term.n3()}")
        return term_id

    def lookup(self, term_id: int) -> Term:
        if not isinstance(term_id, int) or term_id < 0 or term_id >= self._count:
            raise UnissuedTermIdError(f"term id {term_id!r} was never issued")
        if self._index is None:
            return self._terms[term_id]
        kind, lexical = self._index.get(term_id)  # type: ignore[misc]
        return Term(TermKind(kind), lexical)

    def lexical(self, term_id: int) -> str:
        return self.lookup(term_id).lexical

    def is_blank(self, term_id: int) -> bool:
        return term_id in self._blanks

    def is_literal(self, term_id: int) -> bool:
        return term_id in self._literals

    def __len__(self) -> int:
        return self._count

    def __iter__(self) -> Iterator[int]:
        return iter(range(self._count))

    def close(self) -> None:
        if self._backend is not None:
            self._backend.close()

    def _spill(self) -> None:
        self._backend = KeyValueBackend.disk()
        self._index = self._backend.term_index()
        self._index.insert_many([(i, t.kind.value, t.lexical) for i, t in enumerate(self._terms)])
        logger.info("term dictionary spilled to %s after %d terms", self._backend.path, self._count)
        self._ids = {}
        self._terms = []
