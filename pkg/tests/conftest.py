import os

import pytest

from sqlxd.executor import FixtureExecutor, FixtureStore
from sqlxd.sqlast import POSTGRESQL, QUESTDB

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "sqlxd", "data")
TEST_DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def data_path(*parts) -> str:
    return os.path.abspath(os.path.join(DATA_DIR, *parts))


def asset_path(*parts) -> str:
    return os.path.abspath(os.path.join(TEST_DATA_DIR, *parts))


@pytest.fixture(scope="session")
def probe_store():
    return FixtureStore.load(data_path("fixtures", "probe_questdb_postgresql.jsonl"))


@pytest.fixture(scope="session")
def listing_store():
    return FixtureStore.load(data_path("fixtures", "listings_fixtures.jsonl"))


@pytest.fixture()
def probe_executors(probe_store):
    return (
        FixtureExecutor(probe_store, "questdb", QUESTDB),
        FixtureExecutor(probe_store, "postgresql", POSTGRESQL),
    )
