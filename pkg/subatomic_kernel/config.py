import logging
import os
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

_DEFAULT_TOOLS = "terms,systems,proofs,split,interp,oracle"


def _int_env(name: str, default: int) -> int:
    """Read an integer environment variable, falling back on bad values."""
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning("Ignoring non-integer %s=%r, using %d", name, raw, default)
        return default


@dataclass
class KernelConfig:
    """Configuration for the subatomic kernel CLI and tool server."""

    # Tool server settings
    host: str = "0.0.0.0"
    port: int = 7720

    # Tool groups to expose (comma-separated in env, or set)
    enabled_tools: set[str] = field(default_factory=lambda: set(_DEFAULT_TOOLS.split(",")))

    # Proof search
    search_depth: int = 6
    step_budget: int = 20000

    # Randomness and sampling
    seed: int = 0
    audit_samples: int = 1000

    # Canonical forms memoized per theory subset
    canonical_cache_size: int = 65536

    # Tool inputs longer than this are rejected
    max_input_chars: int = 100000

    @classmethod
    def from_env(cls) -> "KernelConfig":
        """Load configuration from environment variables."""
        tools_str = os.getenv("SUBATOMIC_MCP_TOOLS", _DEFAULT_TOOLS)
        enabled_tools = {t.strip() for t in tools_str.split(",") if t.strip()}

        return cls(
            host=os.getenv("SUBATOMIC_MCP_HOST", "0.0.0.0"),
            port=_int_env("SUBATOMIC_MCP_PORT", 7720),
            enabled_tools=enabled_tools,
            search_depth=_int_env("SUBATOMIC_SEARCH_DEPTH", 6),
            step_budget=_int_env("SUBATOMIC_STEP_BUDGET", 20000),
            seed=_int_env("SUBATOMIC_SEED", 0),
            audit_samples=_int_env("SUBATOMIC_AUDIT_SAMPLES", 1000),
            canonical_cache_size=_int_env("SUBATOMIC_CANONICAL_CACHE", 65536),
            max_input_chars=_int_env("SUBATOMIC_MAX_INPUT_CHARS", 100000),
        )

    def is_enabled(self, tool_group: str) -> bool:
        """Check if a tool group is enabled."""
        return tool_group in self.enabled_tools


# Global config instance
config = KernelConfig.from_env()
