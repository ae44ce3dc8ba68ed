from enum import Enum
from typing import NamedTuple

from pydantic import BaseModel, Field

_LITERAL_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


class TermKind(str, Enum):
    IRI = "iri"
    BLANK = "bnode"
    LITERAL = "literal"


class Term(NamedTuple):
    """
    An RDF term in canonical text form.

    IRIs carry no angle brackets, blank nodes are `_:label`, literals keep their
    N-Triples quoting together with the language tag or datatype.
    """

    kind: TermKind
    lexical: str

    @classmethod
    def iri(cls, value: str) -> "Term":
        return cls(TermKind.IRI, value)

    @classmethod
    def blank(cls, label: str) -> "Term":
        return cls(TermKind.BLANK, label if label.startswith("_:") else f"_:{label}")

    @classmethod
    def literal(cls, value: str, language: str | None = None, datatype: str | None = None) -> "Term":
        body = '"' + "".join(_LITERAL_ESCAPES.get(ch, ch) for ch in value) + '"'
        if language:
            body += f"@{language}"
        elif datatype:
            body += f"^^<{datatype}>"
        return cls(TermKind.LITERAL, body)

    @classmethod
    def from_lexical(cls, text: str) -> "Term":
        """Inverse of `lexical`: the kind is recovered from the leading characters."""
        if text.startswith("_:"):
            return cls(TermKind.BLANK, text)
        if text.startswith('"'):
            return cls(TermKind.LITERAL, text)
        return cls(TermKind.IRI, text)

    def n3(self) -> str:
        if self.kind is TermKind.IRI:
            return f"<{self.lexical}>"
        return self.lexical


class IngestReport(BaseModel):
    parsed: int = Field(0, description="Well-formed triple lines read (duplicates included).")
    deduplicated: int = Field(0, description="Well-formed lines dropped because the triple was already stored.")
    skipped: int = Field(0, description="Malformed lines skipped.")
    terms: int = Field(0, description="Distinct terms interned.")
    predicates: int = Field(0, description="Distinct predicates in the store.")
    files: list[str] = Field(default_factory=list, description="Sources ingested, in order.")
