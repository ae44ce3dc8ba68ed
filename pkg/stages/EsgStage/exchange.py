"""
ESG export / import as four TSV files plus meta.json:

  id.tsv       <term-lexical> TAB <esid>
  is.tsv       <esid> TAB <term-lexical>
  h.tsv        <esid> TAB <esid>      (child, super)
  hminus.tsv   <esid> TAB <esid>      (super, child)

Rows are sorted so that identical graphs give byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

from pydantic import ValidationError

from stage_tools.audit_tool import emit_audit_entry, get_logger
from stage_tools.errors import EsgFormatError
from stage_tools.json_tool import write_json
from stage_tools.kv_tool import KeyValueBackend
from stages.EsgStage.baseclass import BuildLog
from stages.EsgStage.graph import EquivalenceSetGraph
from stages.IngestStage.baseclass import Term
from stages.IngestStage.terms import TermDictionary

ID_FILE = "id.tsv"
IS_FILE = "is.tsv"
H_FILE = "h.tsv"
HMINUS_FILE = "hminus.tsv"
META_FILE = "meta.json"
ESG_FILES = (ID_FILE, IS_FILE, H_FILE, HMINUS_FILE, META_FILE)
FORMAT_VERSION = 1

logger = get_logger("exchange")


def _check_lexical(lexical: str) -> str:
    if "\t" in lexical or "\n" in lexical or "\r" in lexical:
        raise EsgFormatError(f"term cannot be written to TSV: {lexical!r}")
    return lexical


def export_esg(esg: EquivalenceSetGraph, directory: Path) -> Path:
    """Write the graph into `directory` (created when missing)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lexical = esg.terms.lexical

    id_rows = sorted((_check_lexical(lexical(t)), esid) for t, esid in esg.id_map.items())
    is_rows = sorted((esid, lexical(t)) for t, esid in esg.id_map.items())
    h_rows = sorted(esg.edges())
    hminus_rows = sorted((parent, child) for child, parent in h_rows)

    with (directory / ID_FILE).open("w", encoding="utf-8", newline="\n") as f:
        f.writelines(f"{lex}\t{esid}\n" for lex, esid in id_rows)
    with (directory / IS_FILE).open("w", encoding="utf-8", newline="\n") as f:
        f.writelines(f"{esid}\t{lex}\n" for esid, lex in is_rows)
    for name, rows in ((H_FILE, h_rows), (HMINUS_FILE, hminus_rows)):
        with (directory / name).open("w", encoding="utf-8", newline="\n") as f:
            f.writelines(f"{a}\t{b}\n" for a, b in rows)

    meta = {
        "format_version": FORMAT_VERSION,
        "mode": esg.mode,
        "next_esid": esg.next_id,
        "counts": {"sets": esg.set_count, "terms": esg.term_count, "edges": esg.edge_count},
        "log": esg.log.model_dump(mode="json"),
        **{k: v for k, v in esg.meta.items() if k not in ("format_version", "mode", "next_esid", "counts", "log")},
    }
    write_json(directory / META_FILE, meta)
    emit_audit_entry(logger, {"event": "export_finished", "directory": str(directory), **meta["counts"]})
    return directory


def _rows(path: Path) -> Iterator[Tuple[int, List[str]]]:
    if not path.exists():
        raise EsgFormatError("missing file", path=str(path))
    with path.open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise EsgFormatError(f"expected 2 tab-separated columns, got {len(cols)}", path=str(path), line=lineno)
            yield lineno, cols


def _esid(text: str, path: Path, lineno: int) -> int:
    try:
        value = int(text)
    except ValueError:
        raise EsgFormatError(f"not a set id: {text!r}", path=str(path), line=lineno) from None
    if value < 0:
        raise EsgFormatError(f"negative set id: {value}", path=str(path), line=lineno)
    return value


def import_esg(
    directory: Path,
    terms: Optional[TermDictionary] = None,
    backend: Optional[KeyValueBackend] = None,
) -> EquivalenceSetGraph:
    """
    Read an export back. Terms are interned into `terms` (a fresh dictionary when
    omitted), so an import can be aligned with a re-ingested store.
    """
    directory = Path(directory)
    terms = terms if terms is not None else TermDictionary()
    esg = EquivalenceSetGraph(terms, backend)

    meta_path = directory / META_FILE
    try:
        meta: Dict[str, object] = json.loads(meta_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise EsgFormatError("missing file", path=str(meta_path)) from None
    except json.JSONDecodeError as exc:
        raise EsgFormatError(f"invalid JSON: {exc.msg}", path=str(meta_path), line=exc.lineno) from None
    if not isinstance(meta, dict):
        raise EsgFormatError("meta.json must hold an object", path=str(meta_path))

    is_path = directory / IS_FILE
    sets: Dict[int, set] = {}
    owner: Dict[int, int] = {}
    for lineno, (esid_text, lex) in _rows(is_path):
        esid = _esid(esid_text, is_path, lineno)
        t = terms.resolve(Term.from_lexical(lex))
        other = owner.setdefault(t, esid)
        if other != esid:
            raise EsgFormatError(f"term {lex!r} appears in sets {other} and {esid}", path=str(is_path), line=lineno)
        sets.setdefault(esid, set()).add(t)
    for esid, members in sets.items():
        esg.is_map.put(esid, members)
        for t in members:
            esg.id_map[t] = esid

    id_path = directory / ID_FILE
    id_rows = 0
    for lineno, (lex, esid_text) in _rows(id_path):
        esid = _esid(esid_text, id_path, lineno)
        t = terms.find(Term.from_lexical(lex))
        if t is None or esg.id_map.get(t) != esid:
            raise EsgFormatError(f"id.tsv disagrees with is.tsv for {lex!r}", path=str(id_path), line=lineno)
        id_rows += 1
    if id_rows != esg.term_count:
        raise EsgFormatError(f"id.tsv has {id_rows} rows, is.tsv names {esg.term_count} terms", path=str(id_path))

    h_path, hminus_path = directory / H_FILE, directory / HMINUS_FILE
    h_pairs = set()
    for lineno, (a, b) in _rows(h_path):
        child, parent = _esid(a, h_path, lineno), _esid(b, h_path, lineno)
        if child not in sets or parent not in sets:
            raise EsgFormatError(f"edge {child}->{parent} names an unknown set", path=str(h_path), line=lineno)
        h_pairs.add((child, parent))
        esg.add_edge(child, parent)
    hminus_pairs = set()
    for lineno, (a, b) in _rows(hminus_path):
        parent, child = _esid(a, hminus_path, lineno), _esid(b, hminus_path, lineno)
        hminus_pairs.add((child, parent))
    if h_pairs != hminus_pairs:
        raise EsgFormatError("h.tsv and hminus.tsv describe different edges", path=str(hminus_path))

    esg.next_id = max(int(meta.get("next_esid", 0)), max(sets, default=-1) + 1)
    esg.mode = meta.get("mode")  # type: ignore[assignment]
    try:
        esg.log = BuildLog.model_validate(meta.get("log", {}))
    except ValidationError as exc:
        raise EsgFormatError(f"invalid build log: {exc.error_count()} errors", path=str(meta_path)) from None
    esg.meta = {k: v for k, v in meta.items() if k not in ("log", "next_esid", "mode", "counts", "format_version")}
    return esg
