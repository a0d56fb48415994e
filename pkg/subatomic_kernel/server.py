import logging
from typing import Any

from mcp.server import Server
from mcp.types import Tool, TextContent

from subatomic_kernel.config import config
from subatomic_kernel.tools.terms import TERMS_TOOLS, handle_terms_tool
from subatomic_kernel.tools.systems import SYSTEMS_TOOLS, handle_systems_tool
from subatomic_kernel.tools.proofs import PROOFS_TOOLS, handle_proofs_tool
from subatomic_kernel.tools.split import SPLIT_TOOLS, handle_split_tool
from subatomic_kernel.tools.interp import INTERP_TOOLS, handle_interp_tool
from subatomic_kernel.tools.oracle import ORACLE_TOOLS, handle_oracle_tool

logger = logging.getLogger(__name__)

# Create the MCP server
server = Server("subatomic-kernel")

# group -> (tool list, handler, label used in "not enabled" replies)
TOOL_GROUPS = {
    "terms": (TERMS_TOOLS, handle_terms_tool, "Terms"),
    "systems": (SYSTEMS_TOOLS, handle_systems_tool, "Systems"),
    "proofs": (PROOFS_TOOLS, handle_proofs_tool, "Proofs"),
    "split": (SPLIT_TOOLS, handle_split_tool, "Split"),
    "interp": (INTERP_TOOLS, handle_interp_tool, "Interp"),
    "oracle": (ORACLE_TOOLS, handle_oracle_tool, "Oracle"),
}


def get_enabled_tools() -> list[Tool]:
    """Get all tools from enabled tool groups."""
    tools: list[Tool] = []

    for group, (group_tools, _, _) in TOOL_GROUPS.items():
        if config.is_enabled(group):
            tools.extend(group_tools)
            logger.info("Enabled tool group: %s (%d tools)", group, len(group_tools))

    return tools


@server.list_tools()
async def list_tools() -> list[Tool]:
    """List all available tools based on configuration."""
    return get_enabled_tools()


@server.call_tool()
async def call_tool(name: str, arguments: dict[str, Any]) -> list[TextContent]:
    """Route tool calls to the appropriate handler."""
    logger.info("Tool call: %s with args: %s", name, sorted(arguments or {}))

    # Route to appropriate handler based on tool prefix
    group = name.split("_", 1)[0]
    if "_" not in name or group not in TOOL_GROUPS:
        return [TextContent(type="text", text=f"Unknown tool: {name}")]

    _, handler, label = TOOL_GROUPS[group]
    if not config.is_enabled(group):
        return [TextContent(type="text", text=f"{label} tools are not enabled")]
    return await handler(name, arguments or {})
