# stage_tools/json_tool.py
"""
JSON helpers for reports, metadata and error payloads.
Converts sets, paths, enums and pydantic models into JSON-friendly values.
"""

from __future__ import annotations

import json
from enum import Enum
from pathlib import Path
from typing import Any

from pydantic import BaseModel


def json_serializable_default(obj: Any) -> Any:
    """
    json.dumps default handler for non-serializable types.
    Sets are emitted sorted so that outputs are reproducible.
    """
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="json")
    if isinstance(obj, (set, frozenset)):
        return sorted(normalize_value(v) for v in obj)
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (bytes, bytearray)):
        try:
            return obj.decode("utf-8")
        except UnicodeDecodeError:
            return obj.hex()
    return str(obj)


def normalize_value(v: Any) -> Any:
    """
    Recursively normalize a value into JSON-serializable form.
    """
    if v is None or isinstance(v, (str, int, float, bool)):
        return v
    if isinstance(v, BaseModel):
        return normalize_value(v.model_dump(mode="json"))
    if isinstance(v, dict):
        return {str(k): normalize_value(val) for k, val in v.items()}
    if isinstance(v, (list, tuple)):
        return [normalize_value(i) for i in v]
    return json_serializable_default(v)


def dumps(obj: Any) -> str:
    return json.dumps(normalize_value(obj), indent=2, sort_keys=True, ensure_ascii=False)


def write_json(path: Path, obj: Any) -> None:
    path.write_text(dumps(obj) + "\n", encoding="utf-8")
