"""Tests for the splitting tool handlers."""

import json

import pytest

from subatomic_kernel.services.derivation_service import from_sequential, parse_sequential, render_derivation
from subatomic_kernel.tools.split import SPLIT_TOOLS, handle_split_tool

DETOUR = """\
seq samlls
start one
step = @. (((bot par one) a (one par bot)) ten ((one par bot) a (bot par one)))
step atom.down @l (((bot a one) par (one a bot)) ten ((one par bot) a (bot par one)))
step atom.down @r (((bot a one) par (one a bot)) ten ((one a bot) par (bot a one)))
step ten.down @. (((bot a one) ten (one a bot)) par ((one a bot) par (bot a one)))
step atom.up @l (((bot ten one) a (one ten bot)) par ((one a bot) par (bot a one)))
step = @. ((one a bot) par (bot a one))
"""


@pytest.fixture
def pi0_text(pi0):
    return render_derivation(pi0)


class TestSplitToolDefinitions:
    """Tests for tool definitions."""

    def test_tool_names(self):
        assert [t.name for t in SPLIT_TOOLS] == ["split_shallow", "split_context", "split_cut_elim"]


class TestSplitShallowTool:
    """Tests for split_shallow."""

    @pytest.mark.asyncio
    async def test_pi0(self, pi0_text):
        result = await handle_split_tool("split_shallow", {"system": "samlls.down", "derivation": pi0_text, "path": "l"})
        data = json.loads(result[0].text)
        assert (data["alpha"], data["a"], data["b"], data["c"]) == ("a", "bot", "one", "(one a bot)")
        assert data["length_phi1"] + data["length_phi2"] <= 2
        assert "trace" not in data

    @pytest.mark.asyncio
    async def test_trace(self, pi0_text):
        result = await handle_split_tool("split_shallow", {
            "system": "samlls.down", "derivation": pi0_text, "path": "l", "trace": True,
        })
        data = json.loads(result[0].text)
        assert data["trace"]
        assert set(data["trace"][0]) == {"case", "formula"}

    @pytest.mark.asyncio
    async def test_path_at_constant(self, pi0_text):
        result = await handle_split_tool("split_shallow", {"system": "samlls.down", "derivation": pi0_text, "path": "l.l"})
        assert json.loads(result[0].text)["error"] == "no connective at l.l"

    @pytest.mark.asyncio
    async def test_unsplittable_system(self, pi0_text):
        result = await handle_split_tool("split_shallow", {"system": "saks", "derivation": pi0_text, "path": "l"})
        assert "error" in json.loads(result[0].text)


class TestOtherSplitTools:
    """Tests for split_context and split_cut_elim."""

    @pytest.mark.asyncio
    async def test_context_at_root(self, pi0_text):
        result = await handle_split_tool("split_context", {"system": "samlls.down", "derivation": pi0_text, "path": "."})
        data = json.loads(result[0].text)
        assert data["k"] == "bot"
        assert data["a"] == "((bot a one) par (one a bot))"

    @pytest.mark.asyncio
    async def test_cut_elim(self):
        _, seq = parse_sequential(DETOUR)
        result = await handle_split_tool("split_cut_elim", {
            "system": "samlls", "derivation": render_derivation(from_sequential(seq)),
        })
        data = json.loads(result[0].text)
        assert data["cuts"] == 1
        assert data["conclusion"] == "((one a bot) par (bot a one))"
        assert "atom.up" not in data["proof"]

    @pytest.mark.asyncio
    async def test_unknown_tool(self):
        result = await handle_split_tool("split_unknown", {})
        assert "Unknown split tool" in result[0].text
