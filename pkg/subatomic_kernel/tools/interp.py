"""Interpretation tools: ordinary readings of subatomic formulae and derivations."""

from typing import Any

from mcp.types import Tool, TextContent

from subatomic_kernel.errors import NotInterpretable
from subatomic_kernel.services.derivation_service import parse_derivation, render_derivation
from subatomic_kernel.services.formula import render_formula
from subatomic_kernel.services.interpretation_service import (
    builtin_map,
    builtin_map_names,
    export_ordinary,
    interpret_derivation,
    interpret_formula,
    is_tame,
    parse_ordinary_derivation,
    render_ordinary,
    represent_derivation,
    represent_formula,
)
from subatomic_kernel.tools.common import (
    DERIVATION_PROPERTY,
    SYSTEM_PROPERTY,
    derivation_arg,
    error_content,
    json_content,
    system_arg,
    text_arg,
)

_MAP_PROPERTY = {
    "type": "string",
    "enum": builtin_map_names(),
    "description": "Interpretation map: 'classical' (saks.down), 'mll' (samlls) or 'bv' (sabvu).",
}


INTERP_TOOLS: list[Tool] = [
    Tool(
        name="interp_interpret",
        description=(
            "Ordinary reading of a subatomic formula, or of a tame derivation given as a derivation "
            "document. Atoms '(u1 a u2)' read as 'a', '(u2 a u1)' as '~a'."
        ),
        inputSchema={
            "type": "object",
            "properties": {
                "map": _MAP_PROPERTY,
                "formula": {"type": "string", "description": "Subatomic formula."},
                "derivation": DERIVATION_PROPERTY,
            },
            "required": ["map"],
        },
    ),
    Tool(
        name="interp_represent",
        description=(
            "Subatomic representation of an ordinary formula, or of an ordinary sequential derivation "
            "('seq <system>' header, 'start' line and 'step RULE @PATH FORMULA' lines)."
        ),
        inputSchema={
            "type": "object",
            "properties": {
                "map": _MAP_PROPERTY,
                "formula": {"type": "string", "description": "Ordinary formula, e.g. '(a par ~a)'."},
                "derivation": {"type": "string", "description": "Ordinary sequential derivation."},
            },
            "required": ["map"],
        },
    ),
    Tool(
        name="interp_tame",
        description="Whether a derivation is tame: no logical rule is applied in the scope of an atom.",
        inputSchema={
            "type": "object",
            "properties": {"system": SYSTEM_PROPERTY, "derivation": DERIVATION_PROPERTY},
            "required": ["system", "derivation"],
        },
    ),
]


async def handle_interp_tool(name: str, arguments: dict[str, Any]) -> list[TextContent]:
    """Handle execution of interpretation tools."""
    if name == "interp_interpret":
        return await _interp_interpret(arguments)
    elif name == "interp_represent":
        return await _interp_represent(arguments)
    elif name == "interp_tame":
        return await _interp_tame(arguments)
    else:
        return [TextContent(type="text", text=f"Unknown interp tool: {name}")]


async def _interp_interpret(args: dict[str, Any]) -> list[TextContent]:
    try:
        m = builtin_map(text_arg(args, "map"))
        if args.get("derivation"):
            d = parse_derivation(text_arg(args, "derivation"), m.system, "derivation")
            return [TextContent(type="text", text=export_ordinary(interpret_derivation(d, m), m))]
        f = m.system.parse(text_arg(args, "formula"), "formula")
        try:
            image = interpret_formula(f, m)
        except NotInterpretable as e:
            return json_content({"interpretable": False, "path": e.path, "error": str(e)})
        return json_content({"interpretable": True, "ordinary": render_ordinary(image)})
    except ValueError as e:
        return error_content(e)


async def _interp_represent(args: dict[str, Any]) -> list[TextContent]:
    try:
        m = builtin_map(text_arg(args, "map"))
        if args.get("derivation"):
            d = parse_ordinary_derivation(text_arg(args, "derivation"), m, "derivation")
            return [TextContent(type="text", text=render_derivation(represent_derivation(d, m)))]
        g = m.parse(text_arg(args, "formula"), "formula")
        return json_content({"formula": render_formula(represent_formula(g, m))})
    except ValueError as e:
        return error_content(e)


async def _interp_tame(args: dict[str, Any]) -> list[TextContent]:
    try:
        sys = system_arg(args)
        d = derivation_arg(args, sys)
        return json_content({"tame": is_tame(d, sys)})
    except ValueError as e:
        return error_content(e)
