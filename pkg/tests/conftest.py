import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fixtures import worked_example_query, worked_example_services  # noqa: E402


@pytest.fixture
def worked_services():
    return worked_example_services()


@pytest.fixture
def worked_query():
    return worked_example_query()
