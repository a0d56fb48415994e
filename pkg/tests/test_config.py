"""Tests for configuration loading."""

import os
from unittest.mock import patch

from subatomic_kernel.config import KernelConfig


class TestKernelConfig:
    """Tests for KernelConfig class."""

    def test_default_values(self):
        """Test default configuration values."""
        with patch.dict(os.environ, {}, clear=True):
            config = KernelConfig.from_env()
            assert config.host == "0.0.0.0"
            assert config.port == 7720
            assert config.enabled_tools == {"terms", "systems", "proofs", "split", "interp", "oracle"}
            assert config.search_depth == 6
            assert config.step_budget == 20000
            assert config.seed == 0
            assert config.audit_samples == 1000
            assert config.canonical_cache_size == 65536
            assert config.max_input_chars == 100000

    def test_custom_host_port(self):
        """Test custom host and port."""
        with patch.dict(
            os.environ,
            {
                "SUBATOMIC_MCP_HOST": "127.0.0.1",
                "SUBATOMIC_MCP_PORT": "9999",
            },
            clear=True,
        ):
            config = KernelConfig.from_env()
            assert config.host == "127.0.0.1"
            assert config.port == 9999

    def test_fixture_environment(self, test_env):
        """Test values taken from the shared test environment."""
        config = KernelConfig.from_env()
        assert config.host == "localhost"
        assert config.port == 7721
        assert config.enabled_tools == {"terms", "proofs"}
        assert config.search_depth == 4
        assert config.step_budget == 500

    def test_tools_with_spaces(self):
        """Test tool groups with spaces are trimmed."""
        with patch.dict(os.environ, {"SUBATOMIC_MCP_TOOLS": "terms , split , oracle"}, clear=True):
            config = KernelConfig.from_env()
            assert config.enabled_tools == {"terms", "split", "oracle"}

    def test_tools_empty_string(self):
        """Test empty tools string."""
        with patch.dict(os.environ, {"SUBATOMIC_MCP_TOOLS": ""}, clear=True):
            config = KernelConfig.from_env()
            assert config.enabled_tools == set()

    def test_search_settings(self):
        """Test search and sampling settings."""
        with patch.dict(
            os.environ,
            {
                "SUBATOMIC_SEARCH_DEPTH": "3",
                "SUBATOMIC_STEP_BUDGET": "100",
                "SUBATOMIC_SEED": "42",
                "SUBATOMIC_AUDIT_SAMPLES": "10",
            },
            clear=True,
        ):
            config = KernelConfig.from_env()
            assert config.search_depth == 3
            assert config.step_budget == 100
            assert config.seed == 42
            assert config.audit_samples == 10

    def test_bad_integer_falls_back(self):
        """Test non-integer values keep the default."""
        with patch.dict(os.environ, {"SUBATOMIC_MCP_PORT": "not-a-port", "SUBATOMIC_SEED": " "}, clear=True):
            config = KernelConfig.from_env()
            assert config.port == 7720
            assert config.seed == 0


class TestIsEnabled:
    """Tests for is_enabled method."""

    def test_is_enabled_true(self):
        """Test is_enabled returns True for enabled tools."""
        config = KernelConfig(enabled_tools={"terms", "split"})
        assert config.is_enabled("terms") is True
        assert config.is_enabled("split") is True

    def test_is_enabled_false(self):
        """Test is_enabled returns False for disabled tools."""
        config = KernelConfig(enabled_tools={"terms"})
        assert config.is_enabled("oracle") is False
        assert config.is_enabled("unknown") is False
