import pytest

from helpers import load_fixture, toy12_sample


@pytest.fixture(scope="session")
def toy12():
    return toy12_sample()


@pytest.fixture(scope="session")
def toy12_oracle():
    return load_fixture("oracle_toy12.json")


@pytest.fixture(scope="session")
def mest_oracle():
    return load_fixture("oracle_mest.json")
