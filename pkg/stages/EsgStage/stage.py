# stage.py
"""
Fixpoint construction of an Equivalence Set Graph.

The main loop alternates three procedures until no predicate is left to process:
  compute_ess        fold equivalence triples into set merges
  compute_hierarchy  fold specialization triples into set-level edges
  update_psets       queue the predicates newly found in the closures of the
                     predicates processed so far
"""

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Iterable, List, Optional, Set

from stage_tools.audit_tool import emit_audit_entry, get_logger
from stage_tools.errors import FixpointError
from stage_tools.kv_tool import KeyValueBackend
from stages.EsgStage.baseclass import BuildLog, EsgParams, SKIPPED_LITERAL
from stages.EsgStage.graph import EquivalenceSetGraph
from stages.IngestStage.stage import TripleStore

logger = get_logger("esg")


@dataclass
class PredicateQueues:
    """P_e / P_s: FIFO queues of predicates still to process."""

    eq: Deque[int] = field(default_factory=deque)
    sub: Deque[int] = field(default_factory=deque)

    def __bool__(self) -> bool:
        return bool(self.eq) or bool(self.sub)


def compute_ess(store: TripleStore, esg: EquivalenceSetGraph, pending: Deque[int]) -> None:
    """Process every queued equivalence predicate (four-case merge logic)."""
    log = esg.log
    terms = store.terms
    id_map = esg.id_map
    while pending:
        p = pending.popleft()
        esg.processed_eq.add(p)
        for r1, r2 in store.triples_with_predicate(p):
            log.triple_visits += 1
            if terms.is_literal(r1) or terms.is_literal(r2):
                log.count(SKIPPED_LITERAL)
                continue
            i1 = id_map.get(r1)
            i2 = id_map.get(r2)
            if i1 is None and i2 is None:
                esg.new_set((r1, r2))
                log.count("eq_fresh")
            elif i2 is None:
                esg.absorb(i1, r2)
                log.count("eq_absorb")
            elif i1 is None:
                esg.absorb(i2, r1)
                log.count("eq_absorb")
            elif i1 != i2:
                esg.merge(i1, i2)
                log.merges += 1
                log.count("eq_merge")
            else:
                log.count("eq_same_set")


def compute_hierarchy(store: TripleStore, esg: EquivalenceSetGraph, pending: Deque[int]) -> None:
    """Process every queued specialization predicate into set-level edges."""
    log = esg.log
    terms = store.terms
    id_map = esg.id_map
    while pending:
        p = pending.popleft()
        esg.processed_sub.add(p)
        for r1, r2 in store.triples_with_predicate(p):
            log.triple_visits += 1
            if terms.is_literal(r1) or terms.is_literal(r2):
                log.count(SKIPPED_LITERAL)
                continue
            i1 = id_map.get(r1)
            i2 = id_map.get(r2)
            if i1 is None and i2 is None:
                i1 = esg.new_set((r1,))
                i2 = i1 if r1 == r2 else esg.new_set((r2,))
                log.count("sub_both_new")
            elif i2 is None:
                i2 = esg.new_set((r2,))
                log.count("sub_object_new")
            elif i1 is None:
                i1 = esg.new_set((r1,))
                log.count("sub_subject_new")
            else:
                log.count("sub_both_known")
            if esg.add_edge(i1, i2):
                log.edges_added += 1


def update_psets(
    esg: EquivalenceSetGraph,
    queues: PredicateQueues,
    params: EsgParams,
    closure_graph: Optional[EquivalenceSetGraph] = None,
    rng: Optional[random.Random] = None,
) -> int:
    """
    Queue every predicate in the closure of an already processed one that has not
    been processed yet. Closures come from `closure_graph` or, for a self-closing
    build, from the graph under construction. Returns the number queued.
    """
    source = closure_graph if closure_graph is not None else (esg if params.self_closing else params.reuse_property_esg)
    if source is None:
        return 0
    queued = 0
    for processed, pending in ((esg.processed_eq, queues.eq), (esg.processed_sub, queues.sub)):
        waiting = set(pending)
        fresh: Set[int] = set()
        for p in list(processed):
            fresh |= source.closure_or_self(p)
        fresh -= processed
        fresh -= waiting
        pending.extend(_ordered(fresh, rng))
        queued += len(fresh)
    return queued


def _ordered(predicates: Iterable[int], rng: Optional[random.Random]) -> List[int]:
    ordered = sorted(predicates)
    if rng is not None:
        rng.shuffle(ordered)
    return ordered


def property_closure_graph(store: TripleStore, params: EsgParams, backend: Optional[KeyValueBackend] = None) -> EquivalenceSetGraph:
    """The property ESG (p_e, p_s) that closures of a non-self-closing build come from."""
    if params.reuse_property_esg is not None:
        return params.reuse_property_esg
    logger.info("no property ESG supplied; computing one over p_e/p_s first")
    return build(store, EsgParams.for_properties(params.p_e, params.p_s), (), backend=backend)


def build(
    store: TripleStore,
    params: EsgParams,
    selection: Iterable[int],
    backend: Optional[KeyValueBackend] = None,
    queue_rng: Optional[random.Random] = None,
) -> EquivalenceSetGraph:
    """
    Run the fixpoint and materialize singletons for the selected entities.
    The returned graph carries its BuildLog in `graph.log`.
    """
    esg = EquivalenceSetGraph(store.terms, backend)
    log: BuildLog = esg.log
    closure_graph: Optional[EquivalenceSetGraph] = None
    queues = PredicateQueues()
    if params.self_closing:
        eq_seeds, sub_seeds = set(params.p_eq_seeds), set(params.p_sub_seeds)
    else:
        closure_graph = property_closure_graph(store, params, backend)
        log.property_cycles = closure_graph.log.cycles
        eq_seeds = set().union(*(closure_graph.closure_or_self(p) for p in params.p_eq_seeds))
        sub_seeds = set().union(*(closure_graph.closure_or_self(p) for p in params.p_sub_seeds))
    queues.eq.extend(_ordered(eq_seeds, queue_rng))
    queues.sub.extend(_ordered(sub_seeds, queue_rng))

    # every cycle processes at least one term never processed before
    cycle_cap = len(store.terms) + len(eq_seeds) + len(sub_seeds) + 1
    while queues:
        if all(p in esg.processed_eq for p in queues.eq) and all(p in esg.processed_sub for p in queues.sub):
            raise FixpointError("queues hold only processed predicates; the fixpoint would not progress")
        log.cycles += 1
        if log.cycles > cycle_cap:
            raise FixpointError(f"no fixpoint after {cycle_cap} cycles")
        merges, edges = log.merges, log.edges_added
        processing_eq, processing_sub = len(queues.eq), len(queues.sub)
        compute_ess(store, esg, queues.eq)
        compute_hierarchy(store, esg, queues.sub)
        update_psets(esg, queues, params, closure_graph, queue_rng)
        emit_audit_entry(
            logger,
            {
                "event": "fixpoint_cycle",
                "cycle": log.cycles,
                "eq_predicates": processing_eq,
                "sub_predicates": processing_sub,
                "merges": log.merges - merges,
                "edges": log.edges_added - edges,
            },
            severity="DEBUG",
        )

    esg.materialize_singletons(selection)
    log.eq_closure = sorted(store.terms.lexical(p) for p in esg.processed_eq)
    log.sub_closure = sorted(store.terms.lexical(p) for p in esg.processed_sub)
    esg.meta["params"] = params.describe(store.terms)
    emit_audit_entry(
        logger,
        {
            "event": "build_finished",
            "cycles": log.cycles,
            "merges": log.merges,
            "edges": log.edges_added,
            "tombstones": log.tombstones,
            "sets": esg.set_count,
            "eq_closure_size": len(esg.processed_eq),
            "sub_closure_size": len(esg.processed_sub),
        },
    )
    return esg


class EsgStage:
    @staticmethod
    def build_properties(store: TripleStore, p_e: int, p_s: int, selection: Iterable[int] = (), backend: Optional[KeyValueBackend] = None) -> EquivalenceSetGraph:
        esg = build(store, EsgParams.for_properties(p_e, p_s), selection, backend=backend)
        esg.mode = "properties"
        return esg

    @staticmethod
    def build_classes(
        store: TripleStore,
        params: EsgParams,
        selection: Iterable[int] = (),
        backend: Optional[KeyValueBackend] = None,
    ) -> EquivalenceSetGraph:
        esg = build(store, params, selection, backend=backend)
        esg.mode = "classes"
        return esg
