"""System tools: list built-ins, show documents, lint splittability."""

from typing import Any

from mcp.types import Tool, TextContent

from subatomic_kernel.services.system_service import builtin_names, lint_splittable, render_system
from subatomic_kernel.tools.common import SYSTEM_PROPERTY, error_content, json_content, system_arg


SYSTEMS_TOOLS: list[Tool] = [
    Tool(
        name="systems_list",
        description="List the built-in subatomic systems.",
        inputSchema={"type": "object", "properties": {}},
    ),
    Tool(
        name="systems_show",
        description="Render a system as a system-definition document.",
        inputSchema={
            "type": "object",
            "properties": {"system": SYSTEM_PROPERTY},
            "required": ["system"],
        },
    ),
    Tool(
        name="systems_lint",
        description=(
            "Check the five splittability conditions of a system. "
            "Returns one entry per condition with a witness when it fails."
        ),
        inputSchema={
            "type": "object",
            "properties": {"system": SYSTEM_PROPERTY},
            "required": ["system"],
        },
    ),
]


async def handle_systems_tool(name: str, arguments: dict[str, Any]) -> list[TextContent]:
    """Handle execution of system tools."""
    if name == "systems_list":
        return json_content({"systems": builtin_names()})
    elif name == "systems_show":
        return await _systems_show(arguments)
    elif name == "systems_lint":
        return await _systems_lint(arguments)
    else:
        return [TextContent(type="text", text=f"Unknown systems tool: {name}")]


async def _systems_show(args: dict[str, Any]) -> list[TextContent]:
    try:
        sys = system_arg(args)
    except ValueError as e:
        return error_content(e)
    return [TextContent(type="text", text=render_system(sys))]


async def _systems_lint(args: dict[str, Any]) -> list[TextContent]:
    try:
        sys = system_arg(args)
    except ValueError as e:
        return error_content(e)
    return json_content({"system": sys.name, **lint_splittable(sys).to_dict()})
