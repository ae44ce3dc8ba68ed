# stage_tools/dot_tool.py
"""Graphviz DOT rendering of small set graphs."""

from pathlib import Path
from typing import TextIO

from stage_tools.errors import ConfigurationError

MAX_DOT_NODES = 10_000


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def write_dot(esg, out: TextIO, max_nodes: int = MAX_DOT_NODES) -> int:
    """One node per set labelled with its members, one arrow per specialization edge."""
    if esg.set_count > max_nodes:
        raise ConfigurationError(f"refusing to draw {esg.set_count} sets; the limit is {max_nodes}")
    out.write("digraph esg {\n  rankdir=BT;\n  node [shape=box];\n")
    for esid in esg.set_ids():
        label = "\\n".join(_escape(esg.terms.lexical(t)) for t in sorted(esg.members(esid)))
        out.write(f'  s{esid} [label="{label}"];\n')
    for child, parent in sorted(esg.edges()):
        out.write(f"  s{child} -> s{parent};\n")
    out.write("}\n")
    return esg.set_count


def export_dot(esg, path: Path, max_nodes: int = MAX_DOT_NODES) -> Path:
    path = Path(path)
    if esg.set_count > max_nodes:
        raise ConfigurationError(f"refusing to draw {esg.set_count} sets; the limit is {max_nodes}")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        write_dot(esg, f, max_nodes)
    return path
