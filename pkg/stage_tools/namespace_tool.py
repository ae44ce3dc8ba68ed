# stage_tools/namespace_tool.py
"""
Turns user-typed names (`<iri>`, `foaf:Person`, `_:b0`, bare IRIs) into terms.
CURIE prefixes come from rdflib's bundled bindings plus user-supplied ones.
"""

from typing import Mapping, Optional

from rdflib import Graph
from rdflib.namespace import NamespaceManager

from stage_tools.errors import UnknownTermError
from stages.IngestStage.baseclass import Term


def namespace_manager(prefixes: Optional[Mapping[str, str]] = None) -> NamespaceManager:
    manager = NamespaceManager(Graph(), bind_namespaces="rdflib")
    for prefix, namespace in (prefixes or {}).items():
        manager.bind(prefix, namespace, override=True, replace=True)
    return manager


def expand_term(text: str, prefixes: Optional[Mapping[str, str]] = None, manager: Optional[NamespaceManager] = None) -> Term:
    text = text.strip()
    if not text:
        raise UnknownTermError("empty term")
    if text.startswith("<") and text.endswith(">"):
        return Term.iri(text[1:-1])
    if text.startswith("_:") or text.startswith('"'):
        return Term.from_lexical(text)
    if ":" not in text:
        raise UnknownTermError(f"{text!r} is neither an IRI nor a CURIE")
    manager = manager if manager is not None else namespace_manager(prefixes)
    prefix = text.split(":", 1)[0]
    bound = {p for p, _ in manager.namespaces()}
    if prefix in bound:
        try:
            return Term.iri(str(manager.expand_curie(text)))
        except ValueError as e:
            raise UnknownTermError(f"cannot expand {text!r}: {e}") from None
    return Term.iri(text)
