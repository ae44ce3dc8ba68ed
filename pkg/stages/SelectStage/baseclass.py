from dataclasses import dataclass
from typing import FrozenSet, Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field

from stage_tools.errors import ConfigurationError

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"

CLASSES = "classes"
PROPERTIES = "properties"
CUSTOM = "custom"
SelectionMode = Literal["classes", "properties", "custom"]


class SeedIris(BaseModel):
    """Ground IRIs of a run; every one can be overridden from config or flags."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    p_eq: str = Field(OWL + "equivalentClass", description="Equivalence relation between observed classes.")
    p_sub: str = Field(RDFS + "subClassOf", description="Specialization relation between observed classes.")
    p_e: str = Field(OWL + "equivalentProperty", description="Equivalence relation between properties.")
    p_s: str = Field(RDFS + "subPropertyOf", description="Specialization relation between properties.")
    rdf_type: str = Field(RDF + "type", description="Membership property.")
    rdfs_class: str = Field(RDFS + "Class", description="Class of all classes.")
    rdf_property: str = Field(RDF + "Property", description="Class of all properties.")
    rdfs_domain: str = Field(RDFS + "domain", description="Domain declaration property.")
    rdfs_range: str = Field(RDFS + "range", description="Range declaration property.")


IriTriple = Tuple[str, str, str]


class Denylist(BaseModel):
    """Ground triples removed from the store before any ESG is built."""

    model_config = ConfigDict(frozen=True)

    triples: FrozenSet[IriTriple] = Field(default_factory=frozenset)

    def extended(self, extra) -> "Denylist":
        extra = frozenset(tuple(t) for t in extra)
        for t in extra:
            if len(t) != 3 or not all(isinstance(x, str) and x and x != "*" for x in t):
                raise ConfigurationError(f"denylist patterns must be ground IRI triples, got {t!r}")
        return Denylist(triples=self.triples | extra)

    def __len__(self) -> int:
        return len(self.triples)


@dataclass(frozen=True)
class SelectionProfile:
    """
    Expanded ground terms. Every field already holds the closure of its seed;
    `linking_predicates` are the closures of the equivalence and specialization
    relations of the observed entities.
    """

    mode: str
    type_predicates: FrozenSet[int]
    class_terms: FrozenSet[int]
    property_terms: FrozenSet[int]
    domain_predicates: FrozenSet[int]
    range_predicates: FrozenSet[int]
    linking_predicates: FrozenSet[int] = frozenset()

    def __post_init__(self) -> None:
        if self.mode not in (CLASSES, PROPERTIES, CUSTOM):
            raise ConfigurationError(f"unknown selection mode {self.mode!r}")
        if self.mode == CLASSES and not self.class_terms:
            raise ConfigurationError("mode=classes needs at least one class term")
        if self.mode == PROPERTIES and not self.property_terms:
            raise ConfigurationError("mode=properties needs at least one property term")
