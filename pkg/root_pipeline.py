"""
Sequential ESG workflow: ingest -> denylist -> property ESG -> class ESG ->
selection -> export -> metrics. Every step reads and extends one shared context.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional

from stage_tools.audit_tool import emit_audit_entry, get_logger
from stage_tools.config_tool import RunConfig
from stage_tools.json_tool import write_json
from stage_tools.kv_tool import KeyValueBackend
from stage_tools.namespace_tool import expand_term, namespace_manager
from stages.EsgStage.baseclass import EsgParams
from stages.EsgStage.exchange import export_esg, import_esg
from stages.EsgStage.graph import EquivalenceSetGraph
from stages.EsgStage.stage import EsgStage
from stages.IngestStage.stage import IngestStage, TripleStore
from stages.MetricsStage.baseclass import MetricsReport
from stages.MetricsStage.stage import MetricsStage
from stages.SelectStage.baseclass import CLASSES, PROPERTIES, SeedIris, SelectionProfile
from stages.SelectStage.denylist_factory import DenylistFactory
from stages.SelectStage.stage import apply_denylist, expand_ground_terms, select_entities

PIPELINE_NAME = "SequentialEsgWorkflow"
INGEST_REPORT_FILE = "ingest.json"

logger = get_logger("pipeline")


@dataclass
class PipelineContext:
    config: RunConfig
    store: Optional[TripleStore] = None
    backend: Optional[KeyValueBackend] = None
    property_esg: Optional[EquivalenceSetGraph] = None
    class_esg: Optional[EquivalenceSetGraph] = None
    profiles: Dict[str, SelectionProfile] = field(default_factory=dict)
    outputs: Dict[str, Path] = field(default_factory=dict)
    reports: Dict[str, MetricsReport] = field(default_factory=dict)

    @property
    def modes(self) -> List[str]:
        return [PROPERTIES, CLASSES] if self.config.mode == "both" else [self.config.mode]

    def graph(self, mode: str) -> EquivalenceSetGraph:
        return self.property_esg if mode == PROPERTIES else self.class_esg

    def close(self) -> None:
        if self.backend is not None:
            self.backend.close()
        if self.store is not None:
            self.store.terms.close()


def expanded_seeds(config: RunConfig) -> SeedIris:
    """Seed values may be CURIEs; store them as absolute IRIs."""
    manager = namespace_manager(config.prefixes)
    return SeedIris(**{k: expand_term(v, manager=manager).lexical for k, v in config.seeds.model_dump().items()})


def ingest_step(ctx: PipelineContext) -> None:
    config = ctx.config
    ctx.store = IngestStage.ingest_paths(config.inputs, config.shared_bnode_scope, config.spill_threshold)
    ctx.backend = KeyValueBackend(config.storage)
    config.output_dir.mkdir(parents=True, exist_ok=True)


def denylist_step(ctx: PipelineContext) -> None:
    denylist = DenylistFactory().get_denylist(ctx.config.denylist_files, ctx.config.denylist_additions)
    removed = apply_denylist(ctx.store, denylist)
    logger.info("denylist removed %d of %d patterns", removed, len(denylist))
    write_json(ctx.config.output_dir / INGEST_REPORT_FILE, ctx.store.refresh_report())


def property_step(ctx: PipelineContext) -> None:
    seeds = ctx.config.seeds
    if ctx.config.mode == CLASSES:
        ctx.property_esg = import_esg(ctx.config.property_esg, terms=ctx.store.terms, backend=ctx.backend)
        logger.info("reusing property ESG from %s (%d sets)", ctx.config.property_esg, ctx.property_esg.set_count)
        return
    p_e, p_s = ctx.store.resolve_iri(seeds.p_e), ctx.store.resolve_iri(seeds.p_s)
    ctx.property_esg = EsgStage.build_properties(ctx.store, p_e, p_s, backend=ctx.backend)


def class_step(ctx: PipelineContext) -> None:
    if CLASSES not in ctx.modes:
        return
    seeds, resolve = ctx.config.seeds, ctx.store.resolve_iri
    params = EsgParams(
        frozenset({resolve(seeds.p_eq)}),
        frozenset({resolve(seeds.p_sub)}),
        resolve(seeds.p_e),
        resolve(seeds.p_s),
        reuse_property_esg=ctx.property_esg,
    )
    ctx.class_esg = EsgStage.build_classes(ctx.store, params, backend=ctx.backend)


def select_step(ctx: PipelineContext) -> None:
    for mode in ctx.modes:
        profile = expand_ground_terms(
            ctx.store,
            ctx.config.seeds,
            mode,
            property_esg=ctx.property_esg,
            class_esg=ctx.class_esg,
            backend=ctx.backend,
        )
        selection = select_entities(ctx.store, profile)
        esg = ctx.graph(mode)
        created = esg.materialize_singletons(selection)
        emit_audit_entry(
            logger,
            {"event": "selection_finished", "mode": mode, "selected": len(selection), "singletons": created},
        )
        esg.meta["seeds"] = ctx.config.seeds.model_dump()
        esg.meta["type_closure"] = sorted(ctx.store.terms.lexical(t) for t in profile.type_predicates)
        esg.meta["selected"] = len(selection)
        ctx.profiles[mode] = profile


def export_step(ctx: PipelineContext) -> None:
    for mode in ctx.modes:
        directory = ctx.config.output_dir / mode if ctx.config.mode == "both" else ctx.config.output_dir
        ctx.outputs[mode] = export_esg(ctx.graph(mode), directory)


def metrics_step(ctx: PipelineContext) -> None:
    for mode in ctx.modes:
        ctx.reports[mode] = MetricsStage.run(
            ctx.graph(mode),
            ctx.store,
            ctx.outputs[mode],
            ctx.profiles[mode].type_predicates,
            mode,
            ctx.config.es0_reading,
        )


class SequentialPipeline:
    """Runs its steps in order over one shared context."""

    def __init__(self, name: str, steps: List[Callable[[PipelineContext], None]]):
        self.name = name
        self.steps = steps

    def run(self, ctx: PipelineContext) -> PipelineContext:
        logger.info("Initializing %s", self.name)
        for step in self.steps:
            logger.info("%s is running", step.__name__)
            step(ctx)
        return ctx


def build_workflow_pipeline() -> SequentialPipeline:
    return SequentialPipeline(
        name=PIPELINE_NAME,
        steps=[ingest_step, denylist_step, property_step, class_step, select_step, export_step, metrics_step],
    )


def run_build(config: RunConfig) -> PipelineContext:
    """Run the whole workflow for `config`; the caller owns (and closes) the context."""
    config = config.model_copy(update={"seeds": expanded_seeds(config)})
    return build_workflow_pipeline().run(PipelineContext(config=config))
