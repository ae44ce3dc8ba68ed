# stage_tools/audit_tool.py
"""
Logging setup and structured audit entries.

Every stage logs through a named logger; run events are emitted as one JSON object
per line so a build log can be diffed between runs.
"""

import json
import logging
import sys
from datetime import datetime, timezone
from typing import Any, Dict

from stage_tools.json_tool import json_serializable_default

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s - %(message)s"
ROOT_LOGGER_NAME = "esg"


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")


def configure_logging(verbose: bool = False) -> logging.Logger:
    """Attach a single stderr handler to the package logger (safe to call twice)."""
    logger = logging.getLogger(ROOT_LOGGER_NAME)
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    if not any(getattr(h, "_esg_handler", False) for h in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._esg_handler = True  # type: ignore[attr-defined]
        logger.addHandler(handler)
    logging.getLogger("rdflib").setLevel(logging.WARNING)
    logging.getLogger("networkx").setLevel(logging.WARNING)
    return logger


AUDIT_ATTR = "audit"


def emit_audit_entry(logger: logging.Logger, entry: Dict[str, Any], severity: str = "INFO") -> None:
    """
    Write a structured audit entry. The record carries the entry itself under
    `record.audit` for handlers that consume structure, and renders it as a single
    JSON line for text handlers.
    Entries must name their `event`; a UTC timestamp is added when missing.
    """
    if "event" not in entry:
        raise ValueError("audit entries need an 'event' field")
    if "ts" not in entry:
        entry = {**entry, "ts": _now_iso()}
    level = logging.getLevelName(severity.upper())
    if not isinstance(level, int):
        level = logging.INFO
    logger.log(
        level,
        json.dumps(entry, sort_keys=True, default=json_serializable_default),
        extra={AUDIT_ATTR: entry},
    )
