from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

# threshold label -> minimum indirect extensional size
IES_THRESHOLDS: Tuple[Tuple[str, int], ...] = (
    ("1", 1),
    ("10", 10),
    ("100", 100),
    ("1K", 1_000),
    ("1M", 1_000_000),
    ("1B", 1_000_000_000),
)

ES0_READINGS = ("ies", "des")


class Distribution(BaseModel):
    """Counts per exact value; `x` strictly increasing."""

    kind: Literal["height", "wcc_size", "ies"]
    points: List[Tuple[int, int]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_points(self) -> "Distribution":
        xs = [x for x, _ in self.points]
        if any(x < 0 for x in xs):
            raise ValueError("distribution values must be non-negative")
        if any(a >= b for a, b in zip(xs, xs[1:])):
            raise ValueError("distribution values must be strictly increasing")
        return self

    @property
    def total(self) -> int:
        return sum(y for _, y in self.points)

    def normalized(self) -> List[Tuple[int, float]]:
        total = self.total
        if not total:
            return []
        return [(x, y / total) for x, y in self.points]

    def log10_buckets(self) -> List[Tuple[int, int]]:
        """(k, count of x in [10^k, 10^(k+1))) for every k up to the largest x; x = 0 is left out."""
        positive = [(x, y) for x, y in self.points if x > 0]
        if not positive:
            return []
        top = len(str(positive[-1][0])) - 1
        buckets = [0] * (top + 1)
        for x, y in positive:
            buckets[len(str(x)) - 1] += y
        return list(enumerate(buckets))

    @classmethod
    def from_values(cls, kind: str, values) -> "Distribution":
        counts: Dict[int, int] = {}
        for v in values:
            counts[v] = counts.get(v, 0) + 1
        return cls(kind=kind, points=sorted(counts.items()))


class MetricsReport(BaseModel):
    """Structural statistics of one ESG; ratios are None when their denominator is 0."""

    mode: Optional[str] = Field(None, description="classes or properties.")
    es0_reading: str = Field("ies", description="Extension used for the *_0 set counts: ies or des.")

    OE: int = Field(0, description="# of Observed Entities")
    OE_bn: int = Field(0, description="# of Observed Entities without BNs")
    BN: int = Field(0, description="# of Blank Nodes (BNs)")
    ES: int = Field(0, description="# of Equivalence Sets (ESs)")
    ES_bn: int = Field(0, description="# of Equivalence Sets (ESs) without BNs")
    R: Optional[float] = Field(None, description="Ratio between ES and OE")
    R_bn: Optional[float] = Field(None, description="Ratio between ES and OE without BNs")
    E: int = Field(0, description="# of Edges")
    H_max: int = Field(0, description="Maximum Height")
    IN: int = Field(0, description="# Isolated ESs")
    TL: int = Field(0, description="# of Top Level ESs")
    TL_bn: int = Field(0, description="# of Top Level ESs without BNs")
    OE_TL: int = Field(0, description="# of OE in Top Level ESs")
    OE_TL_bn: int = Field(0, description="# of OE in Top Level ESs without BNs")
    RTL: Optional[float] = Field(None, description="Ratio between TL and OE-TL")
    RTL_bn: Optional[float] = Field(None, description="Ratio between TL and OE-TL without BNs")
    WCC: int = Field(0, description="# of Weakly Connected Components")
    SCC: int = Field(0, description="# of Strongly Connected Components")
    OE_0: int = Field(0, description="# of OE with Empty Extension")
    OE_0bn: int = Field(0, description="# of OE with Empty Extension without BNs")
    ES_0: int = Field(0, description="# of ES with Empty Extension")
    ES_0bn: int = Field(0, description="# of ES with Empty Extension without BNs")
    IES_thresholds: Dict[str, int] = Field(
        default_factory=lambda: {label: 0 for label, _ in IES_THRESHOLDS},
        description="# of ES with indirect extensional size n or greater",
    )
    OE_TL_0: int = Field(0, description="# of OE-TL with Empty Extension")
    OE_TL_0bn: int = Field(0, description="# of OE-TL with Empty Extension w/o BNs")
    TL_0: int = Field(0, description="# of TL with Empty Extension")
    TL_0bn: int = Field(0, description="# of TL with Empty Extension w/o BNs")


def ratio(numerator: int, denominator: int) -> Optional[float]:
    return numerator / denominator if denominator else None
