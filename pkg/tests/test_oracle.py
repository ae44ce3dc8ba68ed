from hypothesis import given, settings
from hypothesis import strategies as st

from stage_tools.oracle_tool import oracle_esg, oracle_property_closure
from stages.EsgStage.stage import build
from tests.graph_factory import (
    EQ_CLASS,
    EQ_PROP,
    EX,
    ONTO_CLASSES,
    SUB_CLASS,
    SUB_PROP,
    class_params,
    ids,
    iri_id,
    lexicals,
    nt,
    property_params,
    random_lines,
    store_of,
)


def _closure(store, iri):
    return lexicals(store, oracle_property_closure(store, iri_id(store, iri), iri_id(store, EQ_PROP), iri_id(store, SUB_PROP)))


def test_onto_relation_closures(onto_store):
    assert _closure(onto_store, EQ_CLASS) == {EQ_CLASS, EX + "myEquivalentClass"}
    assert _closure(onto_store, SUB_CLASS) == {SUB_CLASS, EX + "mySubClassOf"}
    assert _closure(onto_store, EX + "unseen") == {EX + "unseen"}


def test_closure_follows_equivalence_both_ways_and_subproperties():
    store = store_of(
        [
            nt(EQ_CLASS, EQ_PROP, EX + "same"),
            nt(EX + "narrow", SUB_PROP, EX + "same"),
            nt(EX + "narrower", SUB_PROP, EX + "narrow"),
            nt(EQ_CLASS, SUB_PROP, EX + "broader"),
        ]
    )
    assert _closure(store, EQ_CLASS) == {EQ_CLASS, EX + "same", EX + "narrow", EX + "narrower"}
    assert EQ_CLASS in _closure(store, EX + "broader")


def test_onto_oracle_partition(onto_store):
    result = oracle_esg(onto_store, class_params(onto_store), ids(onto_store, ONTO_CLASSES))
    blocks = {frozenset(lexicals(onto_store, b)) for b in result.partition}
    assert len(blocks) == 4
    assert len(result.edges) == 3
    esg = build(onto_store, class_params(onto_store), ids(onto_store, ONTO_CLASSES))
    assert esg.canonical_form() == result.canonical_form()


@settings(max_examples=1000)
@given(st.integers(min_value=0, max_value=10**7))
def test_builder_agrees_with_oracle(seed):
    store = store_of(random_lines(seed, literal_rate=0.05))
    selection = set(store.predicates())
    for params in (property_params(store), class_params(store)):
        esg = build(store, params, selection)
        assert esg.canonical_form() == oracle_esg(store, params, selection).canonical_form()


@settings(max_examples=200)
@given(st.integers(min_value=0, max_value=10**7))
def test_closures_are_idempotent(seed):
    store = store_of(random_lines(seed))
    esg = build(store, class_params(store), ())
    for esid in esg.set_ids():
        term = next(iter(esg.members(esid)))
        closure = esg.closure_of(term)
        for member in closure:
            assert esg.closure_of(member) <= closure


@settings(max_examples=200)
@given(st.integers(min_value=0, max_value=10**7), st.integers(min_value=0, max_value=60))
def test_adding_triples_never_splits_sets(seed, cut):
    lines = random_lines(seed, blank_rate=0.0)
    smaller, larger = store_of(lines[:cut]), store_of(lines)
    before = build(smaller, class_params(smaller), ()).canonical_form(lexical=True)
    after = build(larger, class_params(larger), ()).canonical_form(lexical=True)
    block_of = {term: block for block in after[0] for term in block}
    for block in before[0]:
        assert len({block_of[t] for t in block}) == 1
    for child, parent in before[1]:
        assert (block_of[next(iter(child))], block_of[next(iter(parent))]) in after[1]
