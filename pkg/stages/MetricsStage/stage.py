# stage.py
"""
Structural metrics of an Equivalence Set Graph.

Edges point from a set to its super sets, so a leaf has no incoming edge and a
top-level set has no outgoing edge. Heights are taken on the SCC condensation,
which makes them well defined when the hierarchy has cycles.
"""

import asyncio
import csv
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Set, Tuple

import networkx as nx

from stage_tools.audit_tool import emit_audit_entry, get_logger
from stage_tools.errors import ConfigurationError
from stage_tools.json_tool import write_json
from stage_tools.kv_tool import MEMORY
from stages.EsgStage.graph import EquivalenceSetGraph
from stages.IngestStage.stage import TripleStore
from stages.MetricsStage.baseclass import ES0_READINGS, IES_THRESHOLDS, Distribution, MetricsReport, ratio
from stages.SelectStage.baseclass import CLASSES, PROPERTIES

REPORT_FILE = "report.json"
HEIGHT_FILE = "height.csv"
WCC_FILE = "wcc.csv"
IES_FILE = "ies.csv"
# bits per reachability pass over a non-forest component
BITSET_CHUNK = 1024

logger = get_logger("metrics")


def hierarchy_digraph(esg: EquivalenceSetGraph) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(esg.set_ids())
    graph.add_edges_from(esg.edges())
    return graph


def _surviving(esg: EquivalenceSetGraph) -> Dict[int, int]:
    """Set id -> number of non-blank members, for the sets that keep at least one."""
    is_blank = esg.terms.is_blank
    counts = {}
    for esid in esg.set_ids():
        kept = sum(1 for t in esg.members(esid) if not is_blank(t))
        if kept:
            counts[esid] = kept
    return counts


def basic_counts(esg: EquivalenceSetGraph) -> Dict[str, object]:
    is_blank = esg.terms.is_blank
    oe = esg.term_count
    bn = sum(1 for esid in esg.set_ids() for t in esg.members(esid) if is_blank(t))
    es = esg.set_count
    es_bn = len(_surviving(esg))
    return {
        "OE": oe,
        "OE_bn": oe - bn,
        "BN": bn,
        "ES": es,
        "ES_bn": es_bn,
        "R": ratio(es, oe),
        "R_bn": ratio(es_bn, oe - bn),
        "E": esg.edge_count,
    }


def heights(esg: EquivalenceSetGraph, graph: Optional[nx.DiGraph] = None) -> Tuple[Dict[int, int], Distribution]:
    """Height of every set (longest path from a leaf on the condensation) and its distribution."""
    graph = graph if graph is not None else hierarchy_digraph(esg)
    condensed = nx.condensation(graph)
    level: Dict[int, int] = {}
    for node in nx.topological_sort(condensed):
        preds = list(condensed.predecessors(node))
        level[node] = 1 + max(level[p] for p in preds) if preds else 0
    mapping = condensed.graph["mapping"]
    by_set = {esid: level[mapping[esid]] for esid in graph.nodes}
    return by_set, Distribution.from_values("height", by_set.values())


def hierarchy_shape(esg: EquivalenceSetGraph) -> Dict[str, object]:
    surviving = _surviving(esg)
    isolated = top = oe_tl = top_bn = oe_tl_bn = 0
    for esid in esg.set_ids():
        if esg.supers(esid):
            continue
        top += 1
        oe_tl += len(esg.members(esid))
        if esid in surviving:
            top_bn += 1
            oe_tl_bn += surviving[esid]
        if not esg.subs(esid):
            isolated += 1
    return {
        "IN": isolated,
        "TL": top,
        "TL_bn": top_bn,
        "OE_TL": oe_tl,
        "OE_TL_bn": oe_tl_bn,
        "RTL": ratio(top, oe_tl),
        "RTL_bn": ratio(top_bn, oe_tl_bn),
    }


def components(esg: EquivalenceSetGraph, graph: Optional[nx.DiGraph] = None) -> Tuple[int, int, Distribution]:
    """(WCC, SCC, distribution of WCC sizes)."""
    graph = graph if graph is not None else hierarchy_digraph(esg)
    sizes = [len(c) for c in nx.weakly_connected_components(graph)]
    scc = nx.number_strongly_connected_components(graph) if graph.number_of_nodes() else 0
    return len(sizes), scc, Distribution.from_values("wcc_size", sizes)


@dataclass
class ExtensionalSizes:
    entity: Dict[int, int] = field(default_factory=dict)
    des: Dict[int, int] = field(default_factory=dict)
    ies: Dict[int, int] = field(default_factory=dict)
    counts: Dict[str, object] = field(default_factory=dict)


def entity_sizes(store: TripleStore, entities: Iterable[int], mode: str, type_closure: Iterable[int] = ()) -> Dict[int, int]:
    """S(e): typing triples naming e as object (classes) or triples using e as predicate (properties)."""
    entities = list(entities)
    if mode == PROPERTIES:
        return {e: len(store.triples_with_predicate(e)) for e in entities}
    instances: Counter = Counter()
    for t in type_closure:
        instances.update(o for _, o in store.triples_with_predicate(t))
    return {e: instances.get(e, 0) for e in entities}


def indirect_sizes(
    esg: EquivalenceSetGraph,
    des: Dict[int, int],
    graph: Optional[nx.DiGraph] = None,
    chunk: int = BITSET_CHUNK,
) -> Dict[int, int]:
    """
    IES of every set: its DES plus the DES of each set below it, every set counted
    once. Members of one SCC share a value.

    Each weakly connected component of the condensed hierarchy is summed on its
    own. A forest component is summed subtree by subtree. Any other component
    tracks which weighted sets lie below each node in bitsets of at most `chunk`
    bits, one pass per chunk, so memory stays within nodes x chunk bits of the
    largest component and time grows with (weighted sets / chunk) x edges.
    """
    graph = graph if graph is not None else hierarchy_digraph(esg)
    condensed = nx.condensation(graph)
    mapping = condensed.graph["mapping"]
    weight: Dict[int, int] = {c: 0 for c in condensed.nodes}
    for esid, value in des.items():
        weight[mapping[esid]] += value

    component_of: Dict[int, int] = {}
    for i, nodes in enumerate(nx.weakly_connected_components(condensed)):
        component_of.update(dict.fromkeys(nodes, i))
    orders: Dict[int, List[int]] = defaultdict(list)
    for c in nx.topological_sort(condensed):
        orders[component_of[c]].append(c)

    total: Dict[int, int] = {}
    for order in orders.values():
        if all(condensed.out_degree(c) <= 1 for c in order):
            # forest: the sets below a node are disjoint subtrees
            for c in order:
                total[c] = weight[c] + sum(total[p] for p in condensed.predecessors(c))
        else:
            total.update(_bitset_sums(condensed, order, weight, chunk))
    return {esid: total[mapping[esid]] for esid in graph.nodes}


def _bitset_sums(condensed: nx.DiGraph, order: List[int], weight: Dict[int, int], chunk: int) -> Dict[int, int]:
    total = dict.fromkeys(order, 0)
    weighted = [c for c in order if weight[c]]
    for start in range(0, len(weighted), chunk):
        window = weighted[start : start + chunk]
        bit = {c: 1 << i for i, c in enumerate(window)}
        reach: Dict[int, int] = {}
        for c in order:
            bits = bit.get(c, 0)
            for p in condensed.predecessors(c):
                bits |= reach.get(p, 0)
            if not bits:
                continue
            reach[c] = bits
            while bits:
                low = bits & -bits
                total[c] += weight[window[low.bit_length() - 1]]
                bits ^= low
    return total


def extensional_sizes(
    esg: EquivalenceSetGraph,
    store: TripleStore,
    type_closure: Iterable[int],
    mode: str,
    es0_reading: str = "ies",
    graph: Optional[nx.DiGraph] = None,
) -> ExtensionalSizes:
    if mode not in (CLASSES, PROPERTIES):
        raise ConfigurationError(f"extensional sizes need mode classes or properties, got {mode!r}")
    if esg.mode is not None and esg.mode != mode:
        raise ConfigurationError(f"ESG was built for {esg.mode}, cannot measure it as {mode}")
    if es0_reading not in ES0_READINGS:
        raise ConfigurationError(f"es0_reading must be one of {ES0_READINGS}, got {es0_reading!r}")
    type_closure = set(type_closure)
    if mode == CLASSES and not type_closure:
        raise ConfigurationError("class extensional sizes need the closure of the type predicate")

    is_blank = esg.terms.is_blank
    members = {esid: esg.members(esid) for esid in esg.set_ids()}
    entity = entity_sizes(store, (t for ms in members.values() for t in ms), mode, type_closure)
    des = {esid: sum(entity[t] for t in ms) for esid, ms in members.items()}
    ies = indirect_sizes(esg, des, graph)
    empty_measure = ies if es0_reading == "ies" else des
    empty = {esid for esid, value in empty_measure.items() if value == 0}
    top = {esid for esid in members if not esg.supers(esid)}

    def non_blank(ms: Set[int]) -> int:
        return sum(1 for t in ms if not is_blank(t))

    counts = {
        "OE_0": sum(1 for size in entity.values() if size == 0),
        "OE_0bn": sum(1 for t, size in entity.items() if size == 0 and not is_blank(t)),
        "ES_0": len(empty),
        "ES_0bn": sum(1 for esid in empty if non_blank(members[esid])),
        "IES_thresholds": {label: sum(1 for v in ies.values() if v >= n) for label, n in IES_THRESHOLDS},
        "OE_TL_0": sum(len(members[esid]) for esid in empty & top),
        "OE_TL_0bn": sum(non_blank(members[esid]) for esid in empty & top),
        "TL_0": len(empty & top),
        "TL_0bn": sum(1 for esid in empty & top if non_blank(members[esid])),
    }
    return ExtensionalSizes(entity=entity, des=des, ies=ies, counts=counts)


async def _inline(fn, *args):
    # sqlite-backed maps share one connection; read them from the event loop thread
    return fn(*args)


async def full_report_async(
    esg: EquivalenceSetGraph,
    store: TripleStore,
    type_closure: Iterable[int] = (),
    mode: Optional[str] = None,
    es0_reading: str = "ies",
) -> Tuple[MetricsReport, Dict[str, Distribution]]:
    """Every metric of the report; the independent computations run in worker threads."""
    mode = mode or esg.mode
    graph = hierarchy_digraph(esg)
    run = asyncio.to_thread if esg.backend.kind == MEMORY else _inline
    (basic, shape, (_, height_dist), (wcc, scc, wcc_dist), sizes) = await asyncio.gather(
        run(basic_counts, esg),
        run(hierarchy_shape, esg),
        run(heights, esg, graph),
        run(components, esg, graph),
        run(extensional_sizes, esg, store, type_closure, mode, es0_reading, graph),
    )
    report = MetricsReport(
        mode=mode,
        es0_reading=es0_reading,
        H_max=max((x for x, _ in height_dist.points), default=0),
        WCC=wcc,
        SCC=scc,
        **basic,
        **shape,
        **sizes.counts,
    )
    distributions = {
        "height": height_dist,
        "wcc_size": wcc_dist,
        "ies": Distribution.from_values("ies", sizes.ies.values()),
    }
    emit_audit_entry(
        logger,
        {"event": "metrics_finished", "mode": mode, "ES": report.ES, "E": report.E, "H_max": report.H_max, "SCC": report.SCC},
    )
    return report, distributions


def full_report(
    esg: EquivalenceSetGraph,
    store: TripleStore,
    type_closure: Iterable[int] = (),
    mode: Optional[str] = None,
    es0_reading: str = "ies",
) -> Tuple[MetricsReport, Dict[str, Distribution]]:
    return asyncio.run(full_report_async(esg, store, type_closure, mode, es0_reading))


def _write_csv(path: Path, header: List[str], rows) -> None:
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_report(report: MetricsReport, distributions: Dict[str, Distribution], directory: Path) -> Path:
    """report.json plus the three plot-ready CSV files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_json(directory / REPORT_FILE, report)
    height = distributions["height"]
    normalized = dict(height.normalized())
    _write_csv(
        directory / HEIGHT_FILE,
        ["x", "count", "normalized"],
        ((x, y, f"{normalized[x]:.12g}") for x, y in height.points),
    )
    _write_csv(directory / WCC_FILE, ["x", "count"], distributions["wcc_size"].points)
    _write_csv(directory / IES_FILE, ["x", "count"], distributions["ies"].points)
    return directory


class MetricsStage:
    @staticmethod
    def run(
        esg: EquivalenceSetGraph,
        store: TripleStore,
        directory: Path,
        type_closure: Iterable[int] = (),
        mode: Optional[str] = None,
        es0_reading: str = "ies",
    ) -> MetricsReport:
        report, distributions = full_report(esg, store, type_closure, mode, es0_reading)
        write_report(report, distributions, directory)
        return report
