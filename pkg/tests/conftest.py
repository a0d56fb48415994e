import os
from unittest.mock import patch

import pytest
from hypothesis import HealthCheck, settings

from subatomic_kernel.services.derivation_service import parse_derivation
from subatomic_kernel.services.system_service import load_builtin

settings.register_profile(
    "kernel",
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("kernel")

_ENV_KEYS = (
    "SUBATOMIC_MCP_HOST",
    "SUBATOMIC_MCP_PORT",
    "SUBATOMIC_MCP_TOOLS",
    "SUBATOMIC_SEARCH_DEPTH",
    "SUBATOMIC_STEP_BUDGET",
    "SUBATOMIC_SEED",
    "SUBATOMIC_AUDIT_SAMPLES",
    "SUBATOMIC_CANONICAL_CACHE",
    "SUBATOMIC_MAX_INPUT_CHARS",
)

# one = (one a one) = ((bot par one) a (one par bot)) -a.down-> ((bot a one) par (one a bot))
PI0 = """\
(step =
  (form one)
  (step =
    (form (one a one))
    (step atom.down
      (form ((bot par one) a (one par bot)))
      (form ((bot a one) par (one a bot))))))
"""


@pytest.fixture(autouse=True)
def reset_config():
    """Reset config before each test."""
    # Store original env vars
    original_env = {key: os.environ.get(key) for key in _ENV_KEYS}

    yield

    # Restore original env vars
    for key, value in original_env.items():
        if value is not None:
            os.environ[key] = value
        elif key in os.environ:
            del os.environ[key]


@pytest.fixture
def test_env():
    """Set up test environment variables."""
    env_vars = {
        "SUBATOMIC_MCP_HOST": "localhost",
        "SUBATOMIC_MCP_PORT": "7721",
        "SUBATOMIC_MCP_TOOLS": "terms,proofs",
        "SUBATOMIC_SEARCH_DEPTH": "4",
        "SUBATOMIC_STEP_BUDGET": "500",
    }
    with patch.dict(os.environ, env_vars, clear=False):
        yield env_vars


@pytest.fixture
def saks():
    return load_builtin("saks.down")


@pytest.fixture
def saks_full():
    return load_builtin("saks")


@pytest.fixture
def mll():
    return load_builtin("samlls.down")


@pytest.fixture
def mll_full():
    return load_builtin("samlls")


@pytest.fixture
def bvu():
    return load_builtin("sabvu.down")


@pytest.fixture
def pi0(mll):
    """Proof of ((bot a one) par (one a bot)) by one atom.down step."""
    return parse_derivation(PI0, mll)
