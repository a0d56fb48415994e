"""Tests for the system tool handlers."""

import json

import pytest

from subatomic_kernel.services.builtin_systems import BUILTIN_DOCUMENTS
from subatomic_kernel.tools.systems import SYSTEMS_TOOLS, handle_systems_tool


class TestSystemsToolDefinitions:
    """Tests for tool definitions."""

    def test_tool_names(self):
        assert [t.name for t in SYSTEMS_TOOLS] == ["systems_list", "systems_show", "systems_lint"]


class TestSystemsTools:
    """Tests for the systems tool handlers."""

    @pytest.mark.asyncio
    async def test_list(self):
        result = await handle_systems_tool("systems_list", {})
        data = json.loads(result[0].text)
        assert "samlls.down" in data["systems"]
        assert "sabv" in data["systems"]

    @pytest.mark.asyncio
    async def test_show(self):
        result = await handle_systems_tool("systems_show", {"system": "samlls.down"})
        lines = result[0].text.splitlines()
        assert lines[0] == "system samlls.down"
        assert "times ten" in lines

    @pytest.mark.asyncio
    async def test_show_unknown(self):
        result = await handle_systems_tool("systems_show", {"system": "lk"})
        assert "unknown declaration" in json.loads(result[0].text)["error"]

    @pytest.mark.asyncio
    async def test_lint_pass(self):
        result = await handle_systems_tool("systems_lint", {"system": "sabvu.down"})
        data = json.loads(result[0].text)
        assert data["splittable"] is True
        assert len(data["conditions"]) == 5

    @pytest.mark.asyncio
    async def test_lint_inline_document(self):
        """Test a system document is accepted in place of a name."""
        doc = BUILTIN_DOCUMENTS["sabvu.down"].replace("assign par o o = one\n", "")
        result = await handle_systems_tool("systems_lint", {"system": doc})
        data = json.loads(result[0].text)
        assert data["splittable"] is False
        failed = [c for c in data["conditions"] if not c["passed"]]
        assert 3 in [c["condition"] for c in failed]

    @pytest.mark.asyncio
    async def test_unknown_tool(self):
        result = await handle_systems_tool("systems_unknown", {})
        assert "Unknown systems tool" in result[0].text
