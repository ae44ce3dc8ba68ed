"""
The worked example: seven agent and person classes from DOLCE, the W3C
Organization ontology, DBpedia and FOAF, linked through user-defined equivalence
and specialization properties declared against the OWL/RDFS ones.
"""

import time

import pytest

from root_pipeline import run_build
from stage_tools.config_tool import RunConfig
from tests.graph_factory import (
    DUL,
    EQ_CLASS,
    EQ_PROP,
    EX,
    ONTO_AGENTS,
    ONTO_CLASSES,
    ONTO_NT,
    ONTO_PERSONS,
    SUB_CLASS,
    SUB_PROP,
)


@pytest.fixture
def onto_run(tmp_path):
    source = tmp_path / "onto.nt"
    source.write_text(ONTO_NT)
    config = RunConfig.resolve({"inputs": [str(source)], "output_dir": str(tmp_path / "out")}, environ={})
    started = time.perf_counter()
    ctx = run_build(config)
    elapsed = time.perf_counter() - started
    yield ctx, elapsed
    ctx.close()


def _blocks(esg):
    lexical = esg.terms.lexical
    return {esid: frozenset(lexical(t) for t in esg.members(esid)) for esid in esg.set_ids()}


def test_store(onto_run):
    ctx, _ = onto_run
    assert ctx.store.triple_count == 9
    assert len(ctx.store.predicates()) == 6


def test_class_graph(onto_run):
    ctx, elapsed = onto_run
    blocks = _blocks(ctx.class_esg)
    assert set(blocks.values()) == {
        frozenset(ONTO_AGENTS),
        frozenset(ONTO_PERSONS),
        frozenset({DUL + "PhysicalAgent"}),
        frozenset({DUL + "SocialAgent"}),
    }
    edges = {(blocks[c], blocks[p]) for c, p in ctx.class_esg.edges()}
    agent = frozenset(ONTO_AGENTS)
    assert edges == {(b, agent) for b in blocks.values() if b != agent}
    assert elapsed < 1.0


def test_property_graph(onto_run):
    ctx, _ = onto_run
    blocks = set(_blocks(ctx.property_esg).values())
    assert frozenset({EQ_CLASS, EX + "myEquivalentClass"}) in blocks
    assert {frozenset({EQ_PROP}), frozenset({SUB_PROP}), frozenset({SUB_CLASS}), frozenset({EX + "mySubClassOf"})} <= blocks
    assert len(blocks) == 5
    assert ctx.property_esg.edge_count == 1
    assert ctx.property_esg.term_count == 6


def test_closure_of_the_agent_set(onto_run):
    ctx, _ = onto_run
    esg = ctx.class_esg
    agent = ctx.store.resolve_iri(DUL + "Agent")
    assert {esg.terms.lexical(t) for t in esg.closure_of(agent)} == ONTO_CLASSES


def test_reports(onto_run):
    ctx, _ = onto_run
    classes = ctx.reports["classes"]
    assert (classes.OE, classes.ES, classes.E, classes.H_max) == (7, 4, 3, 1)
    assert (classes.IN, classes.TL, classes.OE_TL, classes.WCC, classes.SCC) == (0, 1, 2, 1, 4)
    properties = ctx.reports["properties"]
    assert (properties.OE, properties.ES, properties.E) == (6, 5, 1)
