import random
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stage_tools.errors import ConfigurationError, MergeError, UnknownEntityError
from stage_tools.kv_tool import KeyValueBackend
from stages.EsgStage.baseclass import EQ_CASES, SKIPPED_LITERAL, SUB_CASES, EsgParams
from stages.EsgStage.graph import EquivalenceSetGraph
from stages.EsgStage.stage import EsgStage, build
from stages.IngestStage.baseclass import Term
from stages.IngestStage.stage import TripleStore
from stages.IngestStage.terms import TermDictionary
from tests.graph_factory import (
    EQ_CLASS,
    EQ_PROP,
    EX,
    SUB_CLASS,
    SUB_PROP,
    chain_lines,
    class_params,
    iri_id,
    lexicals,
    nt,
    property_params,
    random_lines,
    shuffled,
    store_of,
)


def _classes(lines, selection=()):
    store = store_of(lines)
    return store, build(store, class_params(store), selection)


def _set_lexicals(store, esg, iri):
    return lexicals(store, esg.members(esg.set_of(iri_id(store, iri))))


def ids_of(store, names):
    return {iri_id(store, EX + n) for n in names}


def _assert_counts_add_up(esg):
    esg.check_invariants()
    assert sum(esg.log.case_counts.values()) == esg.log.triple_visits


# --- equivalence -------------------------------------------------------------


def test_fresh_pair_gets_a_new_set():
    store, esg = _classes([nt(EX + "a", EQ_CLASS, EX + "b")])
    assert esg.set_count == 1
    assert _set_lexicals(store, esg, EX + "a") == {EX + "a", EX + "b"}
    assert esg.log.case_counts["eq_fresh"] == 1
    _assert_counts_add_up(esg)


def test_absorb_into_existing_set():
    store, esg = _classes([nt(EX + "a", EQ_CLASS, EX + "b"), nt(EX + "b", EQ_CLASS, EX + "c"), nt(EX + "d", EQ_CLASS, EX + "a")])
    assert esg.set_count == 1
    assert esg.log.case_counts["eq_absorb"] == 2
    assert esg.log.merges == 0
    _assert_counts_add_up(esg)


def test_merge_mints_a_fresh_id_and_retires_both():
    store, esg = _classes(
        [nt(EX + "a", EQ_CLASS, EX + "b"), nt(EX + "c", EQ_CLASS, EX + "d"), nt(EX + "b", EQ_CLASS, EX + "c")]
    )
    assert esg.set_ids() == [2]
    assert esg.log.merges == 1
    assert esg.log.tombstones == 2
    assert _set_lexicals(store, esg, EX + "d") == {EX + a for a in "abcd"}
    _assert_counts_add_up(esg)


def test_same_set_is_counted():
    _, esg = _classes([nt(EX + "a", EQ_CLASS, EX + "b"), nt(EX + "b", EQ_CLASS, EX + "a")])
    assert esg.log.case_counts["eq_same_set"] == 1
    assert esg.set_count == 1


def test_literal_objects_are_skipped():
    _, esg = _classes([nt(EX + "a", EQ_CLASS, '"lit"'), nt(EX + "a", SUB_CLASS, '"lit"')])
    assert esg.set_count == 0
    assert esg.log.case_counts[SKIPPED_LITERAL] == 2
    _assert_counts_add_up(esg)


# --- specialization ----------------------------------------------------------


def test_specialization_cases():
    store, esg = _classes(
        [
            nt(EX + "a", SUB_CLASS, EX + "b"),
            nt(EX + "c", SUB_CLASS, EX + "a"),
            nt(EX + "a", SUB_CLASS, EX + "d"),
            nt(EX + "c", SUB_CLASS, EX + "d"),
            nt(EX + "c", SUB_CLASS, EX + "d"),
        ]
    )
    counts = esg.log.case_counts
    assert (counts["sub_both_new"], counts["sub_subject_new"], counts["sub_object_new"], counts["sub_both_known"]) == (1, 1, 1, 1)
    assert esg.set_count == 4
    assert esg.edge_count == 4
    a = esg.set_of(iri_id(store, EX + "a"))
    assert {next(iter(esg.members(s))) for s in esg.supers(a)} == ids_of(store, "bd")
    _assert_counts_add_up(esg)


def test_self_specialization_is_a_self_loop():
    store, esg = _classes([nt(EX + "x", SUB_CLASS, EX + "x")])
    x = esg.set_of(iri_id(store, EX + "x"))
    assert esg.set_count == 1
    assert list(esg.edges()) == [(x, x)]


def test_equivalence_and_specialization_between_the_same_pair():
    store, esg = _classes([nt(EX + "a", SUB_CLASS, EX + "b"), nt(EX + "a", EQ_CLASS, EX + "b")])
    s = esg.set_of(iri_id(store, EX + "a"))
    assert esg.set_count == 1
    assert list(esg.edges()) == [(s, s)]
    esg.check_invariants()


def test_chain_has_one_edge_per_link():
    _, esg = _classes(chain_lines(5))
    assert esg.set_count == 6
    assert esg.edge_count == 5
    assert esg.log.cycles == 1


# --- hierarchy repair on merge -----------------------------------------------


def _graph(n):
    terms = TermDictionary()
    for i in range(n):
        terms.resolve(Term.iri(f"{EX}t{i}"))
    return EquivalenceSetGraph(terms)


def test_merge_unifies_common_parent():
    esg = _graph(3)
    i1, i2, j = esg.new_set([0]), esg.new_set([1]), esg.new_set([2])
    esg.add_edge(i1, j)
    esg.add_edge(i2, j)
    i3 = esg.merge(i1, i2)
    assert esg.supers(i3) == {j}
    assert esg.subs(j) == {i3}
    assert esg.edge_count == 1
    esg.check_invariants()


def test_merge_unifies_common_child():
    esg = _graph(3)
    i1, i2, k = esg.new_set([0]), esg.new_set([1]), esg.new_set([2])
    esg.add_edge(k, i1)
    esg.add_edge(k, i2)
    i3 = esg.merge(i1, i2)
    assert esg.supers(k) == {i3}
    assert esg.subs(i3) == {k}
    esg.check_invariants()


def test_merge_of_linked_sets_leaves_a_self_loop():
    esg = _graph(2)
    i1, i2 = esg.new_set([0]), esg.new_set([1])
    esg.add_edge(i1, i2)
    i3 = esg.merge(i1, i2)
    assert list(esg.edges()) == [(i3, i3)]
    assert esg.log.tombstones == 2
    esg.check_invariants()


def test_merging_a_set_with_itself_fails():
    esg = _graph(1)
    i = esg.new_set([0])
    with pytest.raises(MergeError):
        esg.merge(i, i)
    with pytest.raises(MergeError):
        esg.fix_hierarchy(i, i, i + 1)


def test_materialize_singletons_skips_literals_and_known_terms():
    store = store_of([nt(EX + "a", EQ_CLASS, EX + "b"), nt(EX + "c", EX + "label", '"lit"')])
    literal = store.terms.require(Term.literal("lit"))
    esg = build(store, class_params(store), {iri_id(store, EX + "a"), iri_id(store, EX + "c"), literal})
    assert esg.log.singletons_materialized == 1
    assert esg.set_count == 2
    assert literal not in esg


def test_unknown_term_lookups():
    store, esg = _classes([nt(EX + "a", EQ_CLASS, EX + "b")])
    outsider = iri_id(store, EX + "zzz")
    with pytest.raises(UnknownEntityError):
        esg.set_of(outsider)
    with pytest.raises(UnknownEntityError):
        esg.closure_of(outsider)
    assert esg.closure_or_self(outsider) == {outsider}


def test_params_validation():
    with pytest.raises(ConfigurationError):
        EsgParams(frozenset(), frozenset({1}), 2, 3)
    with pytest.raises(ConfigurationError):
        EsgParams(frozenset({1}), frozenset({1}), 2, 3)
    assert EsgParams.for_properties(2, 3).self_closing
    assert not EsgParams(frozenset({1}), frozenset({4}), 2, 3).self_closing


# --- predicate closures ------------------------------------------------------


def test_user_equivalence_property_is_used_for_classes():
    store, esg = _classes([nt(EX + "sameClass", EQ_PROP, EQ_CLASS), nt(EX + "A", EX + "sameClass", EX + "B")])
    assert _set_lexicals(store, esg, EX + "A") == {EX + "A", EX + "B"}
    assert EX + "sameClass" in esg.log.eq_closure
    assert esg.log.property_cycles is not None


def test_user_subproperty_of_subclass_is_used_for_classes():
    store, esg = _classes([nt(EX + "narrower", SUB_PROP, SUB_CLASS), nt(EX + "A", EX + "narrower", EX + "B")])
    a, b = esg.set_of(iri_id(store, EX + "A")), esg.set_of(iri_id(store, EX + "B"))
    assert list(esg.edges()) == [(a, b)]
    assert esg.log.sub_closure == sorted([SUB_CLASS, EX + "narrower"])


def test_reused_property_graph_gives_the_same_result():
    lines = [nt(EX + "sameClass", EQ_PROP, EQ_CLASS), nt(EX + "A", EX + "sameClass", EX + "B"), nt(EX + "B", SUB_CLASS, EX + "C")]
    store = store_of(lines)
    prop = build(store, property_params(store), ())
    reused = build(store, class_params(store, reuse=prop), ())
    fresh = build(store, class_params(store), ())
    assert reused.canonical_form() == fresh.canonical_form()
    assert reused.log.property_cycles == prop.log.cycles


def test_property_closure_chain_needs_one_cycle_per_link():
    lines = [
        nt(EX + "p1", EQ_PROP, EQ_PROP),
        nt(EX + "p2", EX + "p1", EQ_PROP),
        nt(EX + "p3", EX + "p2", EQ_PROP),
    ]
    store = store_of(lines)
    esg = build(store, property_params(store), ())
    assert esg.log.cycles == 4
    assert esg.log.eq_closure == sorted([EQ_PROP, EX + "p1", EX + "p2", EX + "p3"])
    assert _set_lexicals(store, esg, EQ_PROP) == {EQ_PROP, EX + "p1", EX + "p2", EX + "p3"}
    _assert_counts_add_up(esg)


def test_subproperty_of_equivalence_joins_the_equivalence_closure():
    lines = [nt(EX + "mySame", SUB_PROP, EQ_PROP), nt(EX + "a", EX + "mySame", EX + "b")]
    store = store_of(lines)
    esg = build(store, property_params(store), ())
    assert esg.log.cycles >= 2
    assert _set_lexicals(store, esg, EX + "a") == {EX + "a", EX + "b"}


def test_equivalence_case_three_needs_two_cycles():
    lines = [
        nt(EX + "sameProperty", SUB_PROP, EQ_PROP),
        nt(EX + "sameClass", EX + "sameProperty", EQ_CLASS),
        nt(EX + "x", EX + "sameClass", EX + "y"),
    ]
    store, esg = _classes(lines)
    assert esg.log.property_cycles >= 2
    assert EX + "sameClass" in esg.log.eq_closure
    assert _set_lexicals(store, esg, EX + "x") == {EX + "x", EX + "y"}
    assert esg.log.case_counts["eq_fresh"] == 1
    _assert_counts_add_up(esg)


def test_specialization_case_three_needs_two_cycles():
    lines = [
        nt(EX + "subProperty", SUB_PROP, SUB_PROP),
        nt(EX + "subClass", EX + "subProperty", SUB_CLASS),
        nt(EX + "y", EX + "subClass", EX + "x"),
    ]
    store, esg = _classes(lines)
    assert esg.log.property_cycles >= 2
    assert EX + "subClass" in esg.log.sub_closure
    x, y = esg.set_of(iri_id(store, EX + "x")), esg.set_of(iri_id(store, EX + "y"))
    assert (y, x) in set(esg.edges())
    assert x != y
    _assert_counts_add_up(esg)


def test_build_properties_marks_the_mode(onto_store):
    esg = EsgStage.build_properties(onto_store, iri_id(onto_store, EQ_PROP), iri_id(onto_store, SUB_PROP))
    assert esg.mode == "properties"
    assert esg.meta["params"]["p_e"] == EQ_PROP


def test_case_names_are_all_tracked():
    _, esg = _classes([])
    assert set(esg.log.case_counts) == {*EQ_CASES, *SUB_CASES, SKIPPED_LITERAL}
    assert esg.set_count == 0


# --- order invariance --------------------------------------------------------


@settings(max_examples=100)
@given(st.integers(min_value=0, max_value=10**6), st.integers(min_value=0, max_value=10**6))
def test_result_does_not_depend_on_triple_or_queue_order(seed, order_seed):
    lines = random_lines(seed, blank_rate=0.0, literal_rate=0.1)
    first = store_of(lines)
    second = store_of(shuffled(lines, order_seed))

    forms = []
    for store, rng in ((first, None), (second, random.Random(order_seed))):
        prop = build(store, property_params(store), (), queue_rng=rng)
        classes = build(store, class_params(store, reuse=prop), (), queue_rng=rng)
        prop.check_invariants()
        classes.check_invariants()
        forms.append((prop.canonical_form(lexical=True), classes.canonical_form(lexical=True)))
    assert forms[0] == forms[1]


@settings(max_examples=100)
@given(st.integers(min_value=0, max_value=10**6))
def test_invariants_hold_on_random_stores(seed):
    store = store_of(random_lines(seed))
    esg = build(store, class_params(store), store.predicates())
    _assert_counts_add_up(esg)
    assert esg.log.tombstones == 2 * esg.log.merges


# --- scale -------------------------------------------------------------------


def _chain_store(n):
    store = TripleStore()
    sub = store.resolve_iri(SUB_CLASS)
    eq = store.resolve_iri(EQ_CLASS)
    store.resolve_iri(EQ_PROP)
    store.resolve_iri(SUB_PROP)
    previous = store.resolve_iri(f"{EX}c0")
    for i in range(1, n + 1):
        current = store.resolve_iri(f"{EX}c{i}")
        store.add(previous, sub if i % 2 else eq, current)
        previous = current
    return store


def _timed_chain_build(n):
    store = _chain_store(n)
    started = time.perf_counter()
    esg = build(store, class_params(store), ())
    return esg, time.perf_counter() - started


@pytest.mark.slow
def test_chain_build_time_grows_linearly():
    small_n, large_n = 10**5, 10**6
    small, small_time = _timed_chain_build(small_n)
    large, large_time = _timed_chain_build(large_n)

    assert small.log.triple_visits == small_n
    assert large.log.triple_visits == large_n
    assert large.edge_count == large_n // 2
    assert large.term_count == large_n + 1
    # no chain predicate joins a closure
    assert large.log.cycles == small.log.cycles <= 2
    assert large.log.property_cycles == small.log.property_cycles <= 2
    assert large_time / small_time <= 15
    large.check_invariants()


def test_disk_backend_matches_memory(onto_store):
    backend = KeyValueBackend.disk()
    try:
        on_disk = build(onto_store, class_params(onto_store), (), backend=backend)
        in_memory = build(onto_store, class_params(onto_store), ())
        assert on_disk.canonical_form(lexical=True) == in_memory.canonical_form(lexical=True)
        on_disk.check_invariants()
    finally:
        backend.close()
