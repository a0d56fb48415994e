"""Tests for the oracle tool handlers."""

import json

import pytest

from subatomic_kernel.tools.oracle import MAX_ENUMERATION_NODES, ORACLE_TOOLS, handle_oracle_tool


class TestOracleToolDefinitions:
    """Tests for tool definitions."""

    def test_tool_names(self):
        assert [t.name for t in ORACLE_TOOLS] == ["oracle_prove", "oracle_enumerate", "oracle_generate"]


class TestProveTool:
    """Tests for oracle_prove."""

    @pytest.mark.asyncio
    async def test_proved(self):
        result = await handle_oracle_tool("oracle_prove", {
            "system": "samlls.down", "formula": "((bot a one) par (one a bot))", "depth": 3,
        })
        data = json.loads(result[0].text)
        assert data["status"] == "proved"
        assert "atom.down" in data["proof"]

    @pytest.mark.asyncio
    async def test_unprovable(self):
        result = await handle_oracle_tool("oracle_prove", {"system": "samlls.down", "formula": "bot"})
        assert json.loads(result[0].text)["status"] == "unprovable"

    @pytest.mark.asyncio
    async def test_budget(self):
        result = await handle_oracle_tool("oracle_prove", {
            "system": "samlls.down", "formula": "((bot a one) par (one a bot))", "budget": 0,
        })
        assert json.loads(result[0].text)["status"] == "budget_exhausted"

    @pytest.mark.asyncio
    async def test_depth_must_be_integer(self):
        result = await handle_oracle_tool("oracle_prove", {"system": "samlls.down", "formula": "one", "depth": "3"})
        assert json.loads(result[0].text)["error"] == "depth must be an integer"


class TestEnumerateTool:
    """Tests for oracle_enumerate."""

    @pytest.mark.asyncio
    async def test_three_nodes(self):
        result = await handle_oracle_tool("oracle_enumerate", {"system": "samlls.down", "max_nodes": 3})
        data = json.loads(result[0].text)
        assert data["count"] == 6

    @pytest.mark.asyncio
    async def test_limit(self):
        result = await handle_oracle_tool("oracle_enumerate", {"system": "samlls.down", "max_nodes": 3, "limit": 2})
        assert json.loads(result[0].text)["formulae"] == ["bot", "one"]

    @pytest.mark.asyncio
    async def test_bound(self):
        result = await handle_oracle_tool("oracle_enumerate", {
            "system": "samlls.down", "max_nodes": MAX_ENUMERATION_NODES + 1,
        })
        assert "max_nodes must be between" in json.loads(result[0].text)["error"]


class TestGenerateTool:
    """Tests for oracle_generate."""

    @pytest.mark.asyncio
    async def test_with_cut(self):
        result = await handle_oracle_tool("oracle_generate", {"system": "samlls", "seed": 1, "max_nodes": 9, "cuts": 1})
        data = json.loads(result[0].text)
        assert data["cuts"] == 1
        assert data["proof"].startswith("(")

    @pytest.mark.asyncio
    async def test_deterministic(self):
        args = {"system": "saks.down", "seed": 4, "max_nodes": 9}
        first = await handle_oracle_tool("oracle_generate", args)
        second = await handle_oracle_tool("oracle_generate", args)
        assert first[0].text == second[0].text

    @pytest.mark.asyncio
    async def test_unknown_tool(self):
        result = await handle_oracle_tool("oracle_unknown", {})
        assert "Unknown oracle tool" in result[0].text
