"""Tests for the derivation tool handlers."""

import json

import pytest

from subatomic_kernel.services.derivation_service import render_derivation
from subatomic_kernel.tools.proofs import PROOFS_TOOLS, handle_proofs_tool

WRONG_SCHEME = """\
(step = (form one)
  (step ten.down (form ((bot par one) a (one par bot))) (form ((bot a one) par (one a bot)))))
"""


class TestProofsToolDefinitions:
    """Tests for tool definitions."""

    def test_tool_names(self):
        assert [t.name for t in PROOFS_TOOLS] == ["proofs_check", "proofs_sequentialize", "proofs_length"]

    def test_check_requires_derivation(self):
        tool = next(t for t in PROOFS_TOOLS if t.name == "proofs_check")
        assert "derivation" in tool.inputSchema["required"]


class TestProofsCheckTool:
    """Tests for proofs_check."""

    @pytest.mark.asyncio
    async def test_valid_proof(self, pi0):
        result = await handle_proofs_tool("proofs_check", {"system": "samlls.down", "derivation": render_derivation(pi0)})
        data = json.loads(result[0].text)
        assert data == {
            "valid": True,
            "proof": True,
            "premiss": "one",
            "conclusion": "((bot a one) par (one a bot))",
        }

    @pytest.mark.asyncio
    async def test_invalid_step(self):
        result = await handle_proofs_tool("proofs_check", {"system": "samlls.down", "derivation": WRONG_SCHEME})
        data = json.loads(result[0].text)
        assert data["valid"] is False
        assert "ten.down" in data["error"]

    @pytest.mark.asyncio
    async def test_unparseable(self):
        result = await handle_proofs_tool("proofs_check", {"system": "samlls.down", "derivation": "(proof one)"})
        assert "expected 'form'" in json.loads(result[0].text)["error"]

    @pytest.mark.asyncio
    async def test_input_too_long(self):
        result = await handle_proofs_tool("proofs_check", {"system": "samlls.down", "derivation": "(" * 200000})
        assert "too long" in json.loads(result[0].text)["error"]


class TestOtherProofsTools:
    """Tests for proofs_sequentialize and proofs_length."""

    @pytest.mark.asyncio
    async def test_sequentialize(self, pi0):
        result = await handle_proofs_tool("proofs_sequentialize", {
            "system": "samlls.down", "derivation": render_derivation(pi0),
        })
        lines = result[0].text.splitlines()
        assert lines[0] == "seq samlls.down"
        assert lines[-1] == "step atom.down @. ((bot a one) par (one a bot))"

    @pytest.mark.asyncio
    async def test_length(self, pi0):
        result = await handle_proofs_tool("proofs_length", {"system": "samlls.down", "derivation": render_derivation(pi0)})
        data = json.loads(result[0].text)
        assert data["length_plus"] == 2
        assert data["up_rules"] == []

    @pytest.mark.asyncio
    async def test_unknown_tool(self):
        result = await handle_proofs_tool("proofs_unknown", {})
        assert "Unknown proofs tool" in result[0].text
