from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, FrozenSet, Optional

from pydantic import BaseModel, Field

from stage_tools.errors import ConfigurationError

if TYPE_CHECKING:
    from stages.EsgStage.graph import EquivalenceSetGraph
    from stages.IngestStage.terms import TermDictionary

# per-case counters of the equivalence and specialization procedures
EQ_CASES = ("eq_fresh", "eq_absorb", "eq_merge", "eq_same_set")
SUB_CASES = ("sub_both_new", "sub_subject_new", "sub_object_new", "sub_both_known")
SKIPPED_LITERAL = "skipped_literal"


@dataclass(frozen=True)
class EsgParams:
    """
    The four ground relations of an ESG. `p_eq_seeds` / `p_sub_seeds` relate the
    observed entities, `p_e` / `p_s` relate properties. When the seeds are exactly
    {p_e} / {p_s} the build closes its own predicate sets (properties run);
    otherwise closures come from `reuse_property_esg` or from a property ESG
    computed on the fly.
    """

    p_eq_seeds: FrozenSet[int]
    p_sub_seeds: FrozenSet[int]
    p_e: int
    p_s: int
    reuse_property_esg: Optional["EquivalenceSetGraph"] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "p_eq_seeds", frozenset(self.p_eq_seeds))
        object.__setattr__(self, "p_sub_seeds", frozenset(self.p_sub_seeds))
        if not self.p_eq_seeds or not self.p_sub_seeds:
            raise ConfigurationError("equivalence and specialization seed sets must be nonempty")
        if self.p_eq_seeds & self.p_sub_seeds:
            raise ConfigurationError("equivalence and specialization seed sets must be disjoint")

    @classmethod
    def for_properties(cls, p_e: int, p_s: int) -> "EsgParams":
        return cls(frozenset({p_e}), frozenset({p_s}), p_e, p_s)

    @property
    def self_closing(self) -> bool:
        return self.p_eq_seeds == {self.p_e} and self.p_sub_seeds == {self.p_s}

    def describe(self, terms: "TermDictionary") -> Dict[str, object]:
        return {
            "p_eq": sorted(terms.lexical(t) for t in self.p_eq_seeds),
            "p_sub": sorted(terms.lexical(t) for t in self.p_sub_seeds),
            "p_e": terms.lexical(self.p_e),
            "p_s": terms.lexical(self.p_s),
        }


class BuildLog(BaseModel):
    cycles: int = Field(0, description="Fixpoint iterations of the main loop.")
    property_cycles: Optional[int] = Field(None, description="Cycles of the property ESG the closures came from.")
    merges: int = Field(0, description="Equivalence-set merge events.")
    tombstones: int = Field(0, description="Set ids retired by merges.")
    edges_added: int = Field(0, description="New set-level specialization edges.")
    triple_visits: int = Field(0, description="(triple, closure predicate) incidences visited.")
    singletons_materialized: int = Field(0, description="Selected entities given a singleton set at finalization.")
    case_counts: Dict[str, int] = Field(
        default_factory=lambda: {name: 0 for name in (*EQ_CASES, *SUB_CASES, SKIPPED_LITERAL)}
    )
    eq_closure: list[str] = Field(default_factory=list, description="Predicates processed as equivalences.")
    sub_closure: list[str] = Field(default_factory=list, description="Predicates processed as specializations.")

    def count(self, case: str) -> None:
        self.case_counts[case] = self.case_counts.get(case, 0) + 1
