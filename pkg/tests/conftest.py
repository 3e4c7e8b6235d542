import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from okn_mcp.fixture import start_fixture_federation  # noqa: E402
from okn_mcp.mcp import Services  # noqa: E402


@pytest.fixture(scope="session")
def fed():
    federation = start_fixture_federation()
    yield federation
    federation.stop()


@pytest.fixture()
def services(fed):
    # fresh caches per test; endpoints are shared
    return Services(fed.registry)
