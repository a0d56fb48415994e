"""Argument helpers shared by the tool handlers."""

import json
from typing import Any

from mcp.types import TextContent

from subatomic_kernel.config import config
from subatomic_kernel.services.derivation_service import Derivation, parse_derivation
from subatomic_kernel.services.formula import Formula
from subatomic_kernel.services.system_service import SystemDef, resolve_system


def text_arg(args: dict[str, Any], key: str) -> str:
    """A required string argument, bounded by ``config.max_input_chars``."""
    value = args.get(key)
    if not value or not isinstance(value, str):
        raise ValueError(f"{key} is required")
    if len(value) > config.max_input_chars:
        raise ValueError(f"{key} too long (max {config.max_input_chars} chars)")
    return value


def int_arg(args: dict[str, Any], key: str, default: int) -> int:
    value = args.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{key} must be an integer")
    return value


def system_arg(args: dict[str, Any]) -> SystemDef:
    """The ``system`` argument: a built-in name or an inline system document."""
    return resolve_system(text_arg(args, "system"))


def formula_arg(args: dict[str, Any], sys: SystemDef, key: str = "formula") -> Formula:
    return sys.parse(text_arg(args, key), key)


def derivation_arg(args: dict[str, Any], sys: SystemDef, key: str = "derivation") -> Derivation:
    return parse_derivation(text_arg(args, key), sys, key)


def json_content(payload: Any) -> list[TextContent]:
    return [TextContent(type="text", text=json.dumps(payload))]


def error_content(e: Exception) -> list[TextContent]:
    return json_content({"error": str(e)})


SYSTEM_PROPERTY = {
    "type": "string",
    "description": "Built-in system name (e.g. 'samlls.down') or a system document.",
}

FORMULA_PROPERTY = {
    "type": "string",
    "description": "Fully parenthesized infix formula, e.g. '((bot a one) par (one a bot))'.",
}

DERIVATION_PROPERTY = {
    "type": "string",
    "description": "Derivation document: nested (form F), (step RULE upper lower) and (comp CONN left right).",
}
