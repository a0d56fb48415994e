"""Oracle tools: bounded proof search, enumeration and random proofs."""

from itertools import islice
from typing import Any

from mcp.types import Tool, TextContent

from subatomic_kernel.config import config
from subatomic_kernel.services.derivation_service import length_plus, render_derivation, up_rule_steps
from subatomic_kernel.services.formula import render_formula
from subatomic_kernel.services.oracle_service import (
    CorpusSpec,
    SearchConfig,
    enumerate_formulae,
    prove,
    random_derivation,
)
from subatomic_kernel.tools.common import (
    FORMULA_PROPERTY,
    SYSTEM_PROPERTY,
    error_content,
    formula_arg,
    int_arg,
    json_content,
    system_arg,
    text_arg,
)

# Enumeration grows quickly past nine nodes
MAX_ENUMERATION_NODES = 9


ORACLE_TOOLS: list[Tool] = [
    Tool(
        name="oracle_prove",
        description=(
            "Bounded backward proof search. Status is 'proved', 'unprovable' (finite space exhausted), "
            "'depth_limit' or 'budget_exhausted'."
        ),
        inputSchema={
            "type": "object",
            "properties": {
                "system": SYSTEM_PROPERTY,
                "formula": FORMULA_PROPERTY,
                "depth": {"type": "integer", "description": f"Depth bound (default {config.search_depth})."},
                "budget": {"type": "integer", "description": f"State budget (default {config.step_budget})."},
            },
            "required": ["system", "formula"],
        },
    ),
    Tool(
        name="oracle_enumerate",
        description="Formulae up to a node bound, one per equality class, in (size, text) order.",
        inputSchema={
            "type": "object",
            "properties": {
                "system": SYSTEM_PROPERTY,
                "max_nodes": {"type": "integer", "description": f"Node bound (1-{MAX_ENUMERATION_NODES})."},
                "atoms": {"type": "integer", "description": "Number of atoms to use (default 1)."},
                "limit": {"type": "integer", "description": "Maximum number of formulae returned (default 200)."},
            },
            "required": ["system", "max_nodes"],
        },
    ),
    Tool(
        name="oracle_generate",
        description="A random proof grown from the unit, optionally with injected cuts. Deterministic in the seed.",
        inputSchema={
            "type": "object",
            "properties": {
                "system": {"type": "string", "description": "Built-in system name."},
                "seed": {"type": "integer", "description": f"Random seed (default {config.seed})."},
                "max_nodes": {"type": "integer", "description": "Node bound for the grown conclusion (default 15)."},
                "cuts": {"type": "integer", "description": "Number of cuts to inject (default 0)."},
            },
            "required": ["system"],
        },
    ),
]


async def handle_oracle_tool(name: str, arguments: dict[str, Any]) -> list[TextContent]:
    """Handle execution of oracle tools."""
    if name == "oracle_prove":
        return await _oracle_prove(arguments)
    elif name == "oracle_enumerate":
        return await _oracle_enumerate(arguments)
    elif name == "oracle_generate":
        return await _oracle_generate(arguments)
    else:
        return [TextContent(type="text", text=f"Unknown oracle tool: {name}")]


async def _oracle_prove(args: dict[str, Any]) -> list[TextContent]:
    try:
        sys = system_arg(args)
        f = formula_arg(args, sys)
        cfg = SearchConfig(depth=int_arg(args, "depth", config.search_depth),
                           budget=int_arg(args, "budget", config.step_budget))
        return json_content(prove(f, sys, cfg).to_dict())
    except ValueError as e:
        return error_content(e)


async def _oracle_enumerate(args: dict[str, Any]) -> list[TextContent]:
    try:
        sys = system_arg(args)
        max_nodes = int_arg(args, "max_nodes", 3)
        if not 1 <= max_nodes <= MAX_ENUMERATION_NODES:
            raise ValueError(f"max_nodes must be between 1 and {MAX_ENUMERATION_NODES}")
        atoms = int_arg(args, "atoms", 1)
        limit = int_arg(args, "limit", 200)
        found = [render_formula(f) for f in islice(enumerate_formulae(sys, max_nodes, atoms), limit)]
        return json_content({"count": len(found), "formulae": found})
    except ValueError as e:
        return error_content(e)


async def _oracle_generate(args: dict[str, Any]) -> list[TextContent]:
    try:
        spec = CorpusSpec(
            system=text_arg(args, "system"),
            seed=int_arg(args, "seed", config.seed),
            max_nodes=int_arg(args, "max_nodes", 15),
            cuts=int_arg(args, "cuts", 0),
        )
        proof = random_derivation(spec)
        sys = system_arg(args)
        return json_content({
            "conclusion": render_formula(proof.conclusion),
            "length_plus": length_plus(proof, sys),
            "cuts": len(up_rule_steps(proof, sys)),
            "proof": render_derivation(proof),
        })
    except ValueError as e:
        return error_content(e)
