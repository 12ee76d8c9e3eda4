import pytest

from loralink.dataset import load_bundled_measurements


@pytest.fixture(scope="session")
def field_table():
    return load_bundled_measurements()
