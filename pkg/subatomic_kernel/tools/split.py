"""Splitting tools: shallow splitting, context reduction and cut elimination."""

from typing import Any, Optional

from mcp.types import Tool, TextContent

from subatomic_kernel.services.derivation_service import length_plus, render_derivation, up_rule_steps
from subatomic_kernel.services.formula import App, parse_path, render_formula, subterm_at
from subatomic_kernel.services.splitting_service import context_reduce, eliminate_cuts, shallow_split
from subatomic_kernel.tools.common import (
    DERIVATION_PROPERTY,
    SYSTEM_PROPERTY,
    derivation_arg,
    error_content,
    json_content,
    system_arg,
    text_arg,
)

_PATH_PROPERTY = {
    "type": "string",
    "description": "Position in the conclusion as dot-separated l/r steps, '.' for the root (e.g. 'l.r').",
}

_TRACE_PROPERTY = {
    "type": "boolean",
    "description": "Include the list of dispatched construction cases.",
}


SPLIT_TOOLS: list[Tool] = [
    Tool(
        name="split_shallow",
        description=(
            "Shallow splitting of a proof of (A alpha B) + C at the alpha-node given by 'path'. "
            "Returns Q1, Q2, the derivation psi and the proofs phi1, phi2."
        ),
        inputSchema={
            "type": "object",
            "properties": {
                "system": SYSTEM_PROPERTY,
                "derivation": DERIVATION_PROPERTY,
                "path": _PATH_PROPERTY,
                "trace": _TRACE_PROPERTY,
            },
            "required": ["system", "derivation", "path"],
        },
    ),
    Tool(
        name="split_context",
        description=(
            "Context reduction of a proof of S{A}, with A at 'path'. "
            "Returns K, the provable context H, the proof zeta of A + K and the derivation chi."
        ),
        inputSchema={
            "type": "object",
            "properties": {
                "system": SYSTEM_PROPERTY,
                "derivation": DERIVATION_PROPERTY,
                "path": _PATH_PROPERTY,
                "trace": _TRACE_PROPERTY,
            },
            "required": ["system", "derivation", "path"],
        },
    ),
    Tool(
        name="split_cut_elim",
        description="Eliminate every cut of a proof, topmost first. Returns the cut-free proof.",
        inputSchema={
            "type": "object",
            "properties": {
                "system": SYSTEM_PROPERTY,
                "derivation": DERIVATION_PROPERTY,
                "trace": _TRACE_PROPERTY,
            },
            "required": ["system", "derivation"],
        },
    ),
]


async def handle_split_tool(name: str, arguments: dict[str, Any]) -> list[TextContent]:
    """Handle execution of splitting tools."""
    if name == "split_shallow":
        return await _split_shallow(arguments)
    elif name == "split_context":
        return await _split_context(arguments)
    elif name == "split_cut_elim":
        return await _split_cut_elim(arguments)
    else:
        return [TextContent(type="text", text=f"Unknown split tool: {name}")]


def _with_trace(payload: dict[str, Any], trace: Optional[list[tuple[int, str]]]) -> dict[str, Any]:
    if trace is not None:
        payload["trace"] = [{"case": case, "formula": f} for case, f in trace]
    return payload


async def _split_shallow(args: dict[str, Any]) -> list[TextContent]:
    trace: Optional[list[tuple[int, str]]] = [] if args.get("trace") else None
    try:
        sys = system_arg(args)
        d = derivation_arg(args, sys)
        path = parse_path(text_arg(args, "path"))
        node = subterm_at(d.conclusion, path)
        if not isinstance(node, App):
            raise ValueError(f"no connective at {text_arg(args, 'path')}")
        result = shallow_split(d, node.conn, path, sys, trace)
        return json_content(_with_trace(result.to_dict(sys), trace))
    except ValueError as e:
        return error_content(e)


async def _split_context(args: dict[str, Any]) -> list[TextContent]:
    trace: Optional[list[tuple[int, str]]] = [] if args.get("trace") else None
    try:
        sys = system_arg(args)
        d = derivation_arg(args, sys)
        result = context_reduce(d, parse_path(text_arg(args, "path")), sys, trace)
        return json_content(_with_trace(result.to_dict(), trace))
    except ValueError as e:
        return error_content(e)


async def _split_cut_elim(args: dict[str, Any]) -> list[TextContent]:
    trace: Optional[list[tuple[int, str]]] = [] if args.get("trace") else None
    try:
        sys = system_arg(args)
        d = derivation_arg(args, sys)
        cuts = len(up_rule_steps(d, sys))
        out = eliminate_cuts(d, sys, trace)
        return json_content(_with_trace({
            "cuts": cuts,
            "conclusion": render_formula(out.conclusion),
            "length_plus": length_plus(out, sys),
            "proof": render_derivation(out),
        }, trace))
    except ValueError as e:
        return error_content(e)
