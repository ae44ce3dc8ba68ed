"""
The Equivalence Set Graph data structure.

  id_map      term id -> set id
  is_map      set id  -> member term ids
  h_map       set id  -> ids of the explicit super sets
  hminus_map  set id  -> ids of the explicit sub sets

Set ids come from a monotone counter and are never reused; a merge retires both
inputs and mints a fresh id.
"""

from __future__ import annotations

from collections import deque
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple

from stage_tools.errors import MergeError, UnknownEntityError
from stage_tools.kv_tool import KeyValueBackend
from stages.EsgStage.baseclass import BuildLog
from stages.IngestStage.terms import TermDictionary

CanonicalForm = Tuple[FrozenSet[FrozenSet], FrozenSet[Tuple[FrozenSet, FrozenSet]]]


class EquivalenceSetGraph:
    def __init__(self, terms: TermDictionary, backend: Optional[KeyValueBackend] = None) -> None:
        self.terms = terms
        self.backend = backend if backend is not None else KeyValueBackend.memory()
        prefix = self.backend.fresh_prefix("esg")
        self.id_map = self.backend.scalar_map(f"{prefix}_id")
        self.is_map = self.backend.set_multimap(f"{prefix}_is")
        self.h_map = self.backend.set_multimap(f"{prefix}_h")
        self.hminus_map = self.backend.set_multimap(f"{prefix}_hminus")
        self.processed_eq: Set[int] = set()
        self.processed_sub: Set[int] = set()
        self.next_id = 0
        self.log = BuildLog()
        self.mode: Optional[str] = None
        self.meta: Dict[str, object] = {}

    # --- mutation (builder only) -------------------------------------------

    def new_id(self) -> int:
        esid = self.next_id
        self.next_id += 1
        return esid

    def new_set(self, members: Iterable[int]) -> int:
        esid = self.new_id()
        members = set(members)
        self.is_map.put(esid, members)
        for t in members:
            self.id_map[t] = esid
        return esid

    def absorb(self, esid: int, term: int) -> None:
        self.is_map.add(esid, term)
        self.id_map[term] = esid

    def merge(self, i1: int, i2: int) -> int:
        """Merge two sets into a fresh one and repair the hierarchy around it."""
        if i1 == i2:
            raise MergeError(f"cannot merge set {i1} with itself")
        union = self.is_map.pop(i1) | self.is_map.pop(i2)
        i3 = self.new_id()
        self.is_map.put(i3, union)
        for t in union:
            self.id_map[t] = i3
        self.fix_hierarchy(i1, i2, i3)
        self.log.tombstones += 2
        return i3

    def fix_hierarchy(self, i1: int, i2: int, i3: int) -> None:
        """
        H(i3) = H(i1) | H(i2) and H-(i3) = H-(i1) | H-(i2), with every neighbour's
        reverse entry rewritten to i3. Edges between i1 and i2 become a self-loop.
        """
        if i1 == i2:
            raise MergeError(f"cannot merge set {i1} with itself")
        merged = {i1, i2}
        supers = self.h_map.pop(i1) | self.h_map.pop(i2)
        subs = self.hminus_map.pop(i1) | self.hminus_map.pop(i2)
        for j in supers - merged:
            self.hminus_map.discard(j, i1)
            self.hminus_map.discard(j, i2)
            self.hminus_map.add(j, i3)
        for j in subs - merged:
            self.h_map.discard(j, i1)
            self.h_map.discard(j, i2)
            self.h_map.add(j, i3)
        self.h_map.put(i3, {i3 if j in merged else j for j in supers})
        self.hminus_map.put(i3, {i3 if j in merged else j for j in subs})

    def add_edge(self, child: int, parent: int) -> bool:
        added = self.h_map.add(child, parent)
        self.hminus_map.add(parent, child)
        return added

    def materialize_singletons(self, selection: Iterable[int]) -> int:
        """Give every selected entity without a set its own singleton set."""
        created = 0
        for t in sorted(selection):
            if t not in self.id_map and not self.terms.is_literal(t):
                self.new_set((t,))
                created += 1
        self.log.singletons_materialized += created
        return created

    # --- queries ------------------------------------------------------------

    def set_of(self, term: int) -> int:
        esid = self.id_map.get(term)
        if esid is None:
            raise UnknownEntityError(f"{self._describe(term)} is not in any equivalence set")
        return esid

    def __contains__(self, term: int) -> bool:
        return term in self.id_map

    def members(self, esid: int) -> Set[int]:
        return self.is_map.get(esid)

    def supers(self, esid: int) -> Set[int]:
        return self.h_map.get(esid)

    def subs(self, esid: int) -> Set[int]:
        return self.hminus_map.get(esid)

    def set_ids(self) -> List[int]:
        return sorted(self.is_map.keys())

    def edges(self) -> Iterator[Tuple[int, int]]:
        for child, parents in self.h_map.items():
            for parent in sorted(parents):
                yield child, parent

    @property
    def set_count(self) -> int:
        return len(self.is_map)

    @property
    def term_count(self) -> int:
        return len(self.id_map)

    @property
    def edge_count(self) -> int:
        return self.h_map.pair_count()

    def specializing_sets(self, esid: int) -> Set[int]:
        """Set ids reachable from `esid` through H- (cycle-safe, `esid` included)."""
        seen = {esid}
        queue = deque([esid])
        while queue:
            current = queue.popleft()
            for sub in self.hminus_map.get(current):
                if sub not in seen:
                    seen.add(sub)
                    queue.append(sub)
        return seen

    def closure_of(self, term: int) -> Set[int]:
        """Every term equivalent to `term` or implicitly specializing it."""
        result: Set[int] = set()
        for esid in self.specializing_sets(self.set_of(term)):
            result |= self.is_map.get(esid)
        return result

    def closure_or_self(self, term: int) -> Set[int]:
        """closure_of, except that a term outside the graph closes over itself."""
        if term not in self.id_map:
            return {term}
        return self.closure_of(term)

    def canonical_form(self, lexical: bool = False) -> CanonicalForm:
        """Id-free view: partition of terms and set-level edges between member sets."""
        label = self.terms.lexical if lexical else (lambda t: t)
        blocks = {esid: frozenset(label(t) for t in self.is_map.get(esid)) for esid in self.is_map.keys()}
        partition = frozenset(blocks.values())
        edges = frozenset((blocks[i], blocks[j]) for i, j in self.edges())
        return partition, edges

    def check_invariants(self) -> None:
        """Raise AssertionError when the four maps disagree."""
        live = set(self.is_map.keys())
        seen_terms: Set[int] = set()
        for esid in live:
            members = self.is_map.get(esid)
            assert members, f"set {esid} is empty"
            assert not (members & seen_terms), f"set {esid} overlaps another set"
            seen_terms |= members
            for t in members:
                assert self.id_map.get(t) == esid, f"id_map disagrees for term {t}"
        assert len(self.id_map) == len(seen_terms), "id_map holds terms outside every set"
        for child, parents in self.h_map.items():
            assert child in live, f"tombstoned set {child} in H"
            for parent in parents:
                assert parent in live, f"tombstoned set {parent} in H"
                assert child in self.hminus_map.get(parent), f"edge {child}->{parent} missing from H-"
        for parent, children in self.hminus_map.items():
            assert parent in live, f"tombstoned set {parent} in H-"
            for child in children:
                assert parent in self.h_map.get(child), f"edge {child}->{parent} missing from H"

    def _describe(self, term: int) -> str:
        try:
            return self.terms.lookup(term).n3()
        except LookupError:
            return f"term #{term}"
