import json
from pathlib import Path

import pytest

FROZEN = Path(__file__).with_name("oracle_values.json")


@pytest.fixture(scope="session")
def frozen():
    return json.loads(FROZEN.read_text())
