# stage.py
"""
Entity selection: the observed entities of a run and the ground-term closures
they are selected with, plus removal of denylisted triples.
"""

from typing import Iterable, Optional, Set

from stage_tools.audit_tool import emit_audit_entry, get_logger
from stage_tools.kv_tool import KeyValueBackend
from stages.EsgStage.baseclass import EsgParams
from stages.EsgStage.graph import EquivalenceSetGraph
from stages.EsgStage.stage import EsgStage, build
from stages.IngestStage.baseclass import Term
from stages.IngestStage.stage import TripleStore
from stages.SelectStage.baseclass import CLASSES, CUSTOM, PROPERTIES, Denylist, SeedIris, SelectionProfile
from stages.SelectStage.denylist_factory import DenylistFactory

logger = get_logger("select")


def default_denylist() -> Denylist:
    return DenylistFactory().get_default_denylist()


def apply_denylist(store: TripleStore, denylist: Denylist) -> int:
    """Remove every denylisted triple present in `store`; returns the number removed."""
    removed = 0
    for triple in sorted(denylist.triples):
        ids = [store.terms.find(Term.iri(x)) for x in triple]
        if None in ids:
            continue
        if store.discard(*ids):
            removed += 1
            logger.info("denylisted triple removed: %s", store.serialize_triple(*ids))
    store.refresh_report()
    return removed


def _closure(esg: EquivalenceSetGraph, term: int) -> frozenset:
    return frozenset(esg.closure_or_self(term))


def expand_ground_terms(
    store: TripleStore,
    seeds: SeedIris,
    mode: str,
    property_esg: Optional[EquivalenceSetGraph] = None,
    class_esg: Optional[EquivalenceSetGraph] = None,
    backend: Optional[KeyValueBackend] = None,
) -> SelectionProfile:
    """
    Replace every ground term by its closure. rdf:type, rdfs:domain and rdfs:range
    close over the property ESG; rdfs:Class and rdf:Property close over the class
    relations (p_eq / p_sub) with their predicates taken from that same property ESG.
    """
    resolve = store.resolve
    p_e, p_s = resolve(Term.iri(seeds.p_e)), resolve(Term.iri(seeds.p_s))
    p_eq, p_sub = resolve(Term.iri(seeds.p_eq)), resolve(Term.iri(seeds.p_sub))
    if property_esg is None:
        property_esg = EsgStage.build_properties(store, p_e, p_s, backend=backend)
    if class_esg is None:
        class_params = EsgParams(frozenset({p_eq}), frozenset({p_sub}), p_e, p_s, reuse_property_esg=property_esg)
        class_esg = build(store, class_params, (), backend=backend)

    if mode == PROPERTIES:
        linking = _closure(property_esg, p_e) | _closure(property_esg, p_s)
    else:
        linking = _closure(property_esg, p_eq) | _closure(property_esg, p_sub)

    return SelectionProfile(
        mode=mode,
        type_predicates=_closure(property_esg, resolve(Term.iri(seeds.rdf_type))),
        class_terms=_closure(class_esg, resolve(Term.iri(seeds.rdfs_class))),
        property_terms=_closure(class_esg, resolve(Term.iri(seeds.rdf_property))),
        domain_predicates=_closure(property_esg, resolve(Term.iri(seeds.rdfs_domain))),
        range_predicates=_closure(property_esg, resolve(Term.iri(seeds.rdfs_range))),
        linking_predicates=linking,
    )


def _typed(store: TripleStore, type_predicates: Iterable[int], types: frozenset) -> Set[int]:
    found = set()
    for t in type_predicates:
        found.update(s for s, o in store.triples_with_predicate(t) if o in types)
    return found


def _declared(store: TripleStore, declaring: Iterable[int], types: frozenset) -> Set[int]:
    """Predicates q with a triple <q, d, C>, d a declaring predicate and C in `types`."""
    found = set()
    for d in declaring:
        found.update(q for q, c in store.triples_with_predicate(d) if c in types)
    return found


def select_entities(store: TripleStore, profile: SelectionProfile) -> Set[int]:
    selected: Set[int] = set()
    for p in profile.linking_predicates:
        for s, o in store.triples_with_predicate(p):
            selected.add(s)
            selected.add(o)

    if profile.mode == CUSTOM:
        selected |= _typed(store, profile.type_predicates, profile.class_terms)
    else:
        kinds = profile.class_terms if profile.mode == CLASSES else profile.property_terms
        selected |= _typed(store, profile.type_predicates, kinds)
        for q in _declared(store, profile.domain_predicates, kinds):
            selected.update(s for s, _ in store.triples_with_predicate(q))
        for q in _declared(store, profile.range_predicates, kinds):
            selected.update(o for _, o in store.triples_with_predicate(q))
        if profile.mode == PROPERTIES:
            selected.update(store.predicates())

    return {t for t in selected if not store.terms.is_literal(t)}


class SelectStage:
    """Denylist, ground-term expansion and selection as one step of the pipeline."""

    @staticmethod
    def run(
        store: TripleStore,
        seeds: SeedIris,
        mode: str,
        denylist: Optional[Denylist] = None,
        property_esg: Optional[EquivalenceSetGraph] = None,
        backend: Optional[KeyValueBackend] = None,
    ):
        removed = apply_denylist(store, denylist if denylist is not None else default_denylist())
        profile = expand_ground_terms(store, seeds, mode, property_esg=property_esg, backend=backend)
        selection = select_entities(store, profile)
        emit_audit_entry(
            logger,
            {
                "event": "selection_finished",
                "mode": mode,
                "denylisted": removed,
                "selected": len(selection),
                "type_predicates": len(profile.type_predicates),
                "class_terms": len(profile.class_terms),
                "property_terms": len(profile.property_terms),
                "linking_predicates": len(profile.linking_predicates),
            },
        )
        return profile, selection
