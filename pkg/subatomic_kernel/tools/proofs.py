"""Derivation tools: checking, sequential form and length measures."""

from typing import Any

from mcp.types import Tool, TextContent

from subatomic_kernel.errors import CheckError
from subatomic_kernel.services.derivation_service import (
    check,
    derivation_size,
    export_sequential,
    is_proof,
    length_plus,
    rule_count,
    sequentialize,
    up_rule_steps,
)
from subatomic_kernel.services.formula import render_formula
from subatomic_kernel.tools.common import (
    DERIVATION_PROPERTY,
    SYSTEM_PROPERTY,
    derivation_arg,
    error_content,
    json_content,
    system_arg,
)

_ARGS_SCHEMA = {
    "type": "object",
    "properties": {"system": SYSTEM_PROPERTY, "derivation": DERIVATION_PROPERTY},
    "required": ["system", "derivation"],
}


PROOFS_TOOLS: list[Tool] = [
    Tool(
        name="proofs_check",
        description=(
            "Check every inference of a derivation against a system. "
            "Reports the first invalid node with its path, or the endpoints when valid."
        ),
        inputSchema=_ARGS_SCHEMA,
    ),
    Tool(
        name="proofs_sequentialize",
        description="Render a derivation in sequential form: a start formula and one rewrite step per line.",
        inputSchema=_ARGS_SCHEMA,
    ),
    Tool(
        name="proofs_length",
        description="Length measures of a derivation: rule instances, length without + equalities, size, up-rules.",
        inputSchema=_ARGS_SCHEMA,
    ),
]


async def handle_proofs_tool(name: str, arguments: dict[str, Any]) -> list[TextContent]:
    """Handle execution of derivation tools."""
    if name == "proofs_check":
        return await _proofs_check(arguments)
    elif name == "proofs_sequentialize":
        return await _proofs_sequentialize(arguments)
    elif name == "proofs_length":
        return await _proofs_length(arguments)
    else:
        return [TextContent(type="text", text=f"Unknown proofs tool: {name}")]


async def _proofs_check(args: dict[str, Any]) -> list[TextContent]:
    try:
        sys = system_arg(args)
        d = derivation_arg(args, sys)
    except ValueError as e:
        return error_content(e)
    try:
        check(d, sys)
    except CheckError as e:
        return json_content({"valid": False, "error": str(e), "path": e.path or "."})
    return json_content({
        "valid": True,
        "proof": is_proof(d, sys),
        "premiss": render_formula(d.premiss),
        "conclusion": render_formula(d.conclusion),
    })


async def _proofs_sequentialize(args: dict[str, Any]) -> list[TextContent]:
    try:
        sys = system_arg(args)
        d = derivation_arg(args, sys)
    except ValueError as e:
        return error_content(e)
    return [TextContent(type="text", text=export_sequential(sequentialize(d), sys.name))]


async def _proofs_length(args: dict[str, Any]) -> list[TextContent]:
    try:
        sys = system_arg(args)
        d = derivation_arg(args, sys)
        return json_content({
            "rules": rule_count(d),
            "length_plus": length_plus(d, sys),
            "size": derivation_size(d),
            "up_rules": up_rule_steps(d, sys),
        })
    except ValueError as e:
        return error_content(e)
