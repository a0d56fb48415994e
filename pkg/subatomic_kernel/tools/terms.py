"""Formula tools: canonical forms, equality, negation and +-factors."""

from typing import Any

from mcp.types import Tool, TextContent

from subatomic_kernel.services.formula import render_formula
from subatomic_kernel.services.theory import FULL, PLUS_ONLY, canonicalize, equal, negate, plus_factors
from subatomic_kernel.tools.common import (
    FORMULA_PROPERTY,
    SYSTEM_PROPERTY,
    error_content,
    formula_arg,
    json_content,
    system_arg,
)

_SUBSETS = {"full": FULL, "plus": PLUS_ONLY}


TERMS_TOOLS: list[Tool] = [
    Tool(
        name="terms_canonicalize",
        description=(
            "Canonical form of a formula modulo the equational theory of a system. "
            "Use theory='plus' to normalize only the + connective."
        ),
        inputSchema={
            "type": "object",
            "properties": {
                "system": SYSTEM_PROPERTY,
                "formula": FORMULA_PROPERTY,
                "theory": {"type": "string", "enum": sorted(_SUBSETS), "description": "Axiom subset (default 'full')."},
            },
            "required": ["system", "formula"],
        },
    ),
    Tool(
        name="terms_equal",
        description="Decide whether two formulae are equal modulo the theory of a system.",
        inputSchema={
            "type": "object",
            "properties": {
                "system": SYSTEM_PROPERTY,
                "left": FORMULA_PROPERTY,
                "right": FORMULA_PROPERTY,
                "theory": {"type": "string", "enum": sorted(_SUBSETS), "description": "Axiom subset (default 'full')."},
            },
            "required": ["system", "left", "right"],
        },
    ),
    Tool(
        name="terms_negate",
        description="De Morgan negation: constants by their negation, connectives by their duals.",
        inputSchema={
            "type": "object",
            "properties": {"system": SYSTEM_PROPERTY, "formula": FORMULA_PROPERTY},
            "required": ["system", "formula"],
        },
    ),
    Tool(
        name="terms_plus_factors",
        description="Maximal +-factors of a formula modulo the + axioms.",
        inputSchema={
            "type": "object",
            "properties": {"system": SYSTEM_PROPERTY, "formula": FORMULA_PROPERTY},
            "required": ["system", "formula"],
        },
    ),
]


async def handle_terms_tool(name: str, arguments: dict[str, Any]) -> list[TextContent]:
    """Handle execution of formula tools."""
    if name == "terms_canonicalize":
        return await _terms_canonicalize(arguments)
    elif name == "terms_equal":
        return await _terms_equal(arguments)
    elif name == "terms_negate":
        return await _terms_negate(arguments)
    elif name == "terms_plus_factors":
        return await _terms_plus_factors(arguments)
    else:
        return [TextContent(type="text", text=f"Unknown terms tool: {name}")]


def _subset(args: dict[str, Any]):
    key = args.get("theory", "full")
    if key not in _SUBSETS:
        raise ValueError(f"theory must be one of {sorted(_SUBSETS)}")
    return _SUBSETS[key]


async def _terms_canonicalize(args: dict[str, Any]) -> list[TextContent]:
    try:
        sys = system_arg(args)
        f = formula_arg(args, sys)
        canon = canonicalize(f, sys.theory, _subset(args))
        return json_content({"formula": render_formula(f), "canonical": render_formula(canon)})
    except ValueError as e:
        return error_content(e)


async def _terms_equal(args: dict[str, Any]) -> list[TextContent]:
    try:
        sys = system_arg(args)
        left = formula_arg(args, sys, "left")
        right = formula_arg(args, sys, "right")
        return json_content({"equal": equal(left, right, sys.theory, _subset(args))})
    except ValueError as e:
        return error_content(e)


async def _terms_negate(args: dict[str, Any]) -> list[TextContent]:
    try:
        sys = system_arg(args)
        f = formula_arg(args, sys)
        return json_content({"negation": render_formula(negate(f, sys.signature))})
    except ValueError as e:
        return error_content(e)


async def _terms_plus_factors(args: dict[str, Any]) -> list[TextContent]:
    try:
        sys = system_arg(args)
        f = formula_arg(args, sys)
        factors = plus_factors(f, sys.theory)
        return json_content({"plus": sys.plus, "factors": [render_formula(x) for x in factors]})
    except ValueError as e:
        return error_content(e)
