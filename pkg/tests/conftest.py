from importlib.resources import files

import pytest

from parschema.schema import parse_schema


def load_fixture(name: str) -> str:
    return files("parschema.fixtures").joinpath(name).read_text()


@pytest.fixture
def fixture_schema():
    return lambda name: parse_schema(load_fixture(name + ".schema"))
