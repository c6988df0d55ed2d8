import json
from pathlib import Path

import pytest

from augviz import parse_spec

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text("utf-8")


def fixture_spec(name: str):
    return parse_spec(fixture_text(name))


def fixture_doc(name: str) -> dict:
    return json.loads(fixture_text(name))


@pytest.fixture(scope="session")
def all_fixture_names():
    return sorted(p.name for p in FIXTURES.glob("*.pv.json"))


@pytest.fixture()
def hub(tmp_path):
    from augviz.hub.service import run_in_thread
    server, base_url, _ = run_in_thread(tmp_path / "store")
    yield base_url
    server.shutdown()
    server.server_close()
