# stage_tools/oracle_tool.py
"""
Reference computation of equivalence sets and their specialization edges by
plain fixpoint iteration over the triple store. It is slow on purpose and keeps
no state between calls; tests compare the set graph builder against it.
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Set, Tuple

Block = FrozenSet[int]


def _links(store, predicates: Set[int]) -> List[Tuple[int, int]]:
    literal = store.terms.is_literal
    return [
        (s, o)
        for p in predicates
        for s, o in store.triples_with_predicate(p)
        if not literal(s) and not literal(o)
    ]


def _grow(start: Iterable[int], eq_links, sub_links) -> Set[int]:
    """Everything linked to `start` by equivalence (either way) or by specializing a member."""
    reached = set(start)
    changed = True
    while changed:
        changed = False
        for a, b in eq_links:
            if (a in reached) != (b in reached):
                reached.update((a, b))
                changed = True
        for a, b in sub_links:
            if b in reached and a not in reached:
                reached.add(a)
                changed = True
    return reached


def _property_closures(store, p_e: int, p_s: int) -> Tuple[Set[int], Set[int]]:
    """Closures of p_e and p_s, grown together until neither changes."""
    ce, cs = {p_e}, {p_s}
    while True:
        eq_links, sub_links = _links(store, ce), _links(store, cs)
        next_ce = _grow({p_e}, eq_links, sub_links)
        next_cs = _grow({p_s}, eq_links, sub_links)
        if next_ce == ce and next_cs == cs:
            return ce, cs
        ce, cs = next_ce, next_cs


def oracle_property_closure(store, p: int, p_e: int, p_s: int) -> Set[int]:
    ce, cs = _property_closures(store, p_e, p_s)
    return _grow({p}, _links(store, ce), _links(store, cs))


@dataclass
class OracleResult:
    partition: List[Block] = field(default_factory=list)
    edges: Set[Tuple[int, int]] = field(default_factory=set)
    property_closures: Dict[int, Set[int]] = field(default_factory=dict)

    def canonical_form(self):
        """Same shape as EquivalenceSetGraph.canonical_form()."""
        return (
            frozenset(self.partition),
            frozenset((self.partition[i], self.partition[j]) for i, j in self.edges),
        )


def oracle_esg(store, params, selection: Iterable[int]) -> OracleResult:
    """
    Blocks are the connected components of the equivalence triples; block v points
    to block z when some member of v specializes some member of z.
    Only the seed and relation fields of `params` are read.
    """
    ce, cs = _property_closures(store, params.p_e, params.p_s)
    eq_links, sub_links = _links(store, ce), _links(store, cs)
    closures = {p: _grow({p}, eq_links, sub_links) for p in (*params.p_eq_seeds, *params.p_sub_seeds)}
    eq_closure = set().union(*(closures[p] for p in params.p_eq_seeds))
    sub_closure = set().union(*(closures[p] for p in params.p_sub_seeds))

    equivalences = _links(store, eq_closure)
    specializations = _links(store, sub_closure)
    universe = {t for t in selection if not store.terms.is_literal(t)}
    for s, o in equivalences + specializations:
        universe.update((s, o))

    neighbours: Dict[int, Set[int]] = {t: set() for t in universe}
    for s, o in equivalences:
        neighbours[s].add(o)
        neighbours[o].add(s)
    partition: List[Block] = []
    block_of: Dict[int, int] = {}
    for t in sorted(universe):
        if t in block_of:
            continue
        component = {t}
        frontier = [t]
        while frontier:
            for n in neighbours[frontier.pop()]:
                if n not in component:
                    component.add(n)
                    frontier.append(n)
        for member in component:
            block_of[member] = len(partition)
        partition.append(frozenset(component))

    edges = {(block_of[s], block_of[o]) for s, o in specializations}
    return OracleResult(partition=partition, edges=edges, property_closures=closures)
