from importlib import resources

import pytest
from hypothesis import settings

from teichtqft import codec

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def corpus(name):
    return codec.parse((resources.files("teichtqft") / "data" / f"{name}.tri").read_text())


@pytest.fixture(scope="session")
def fig8():
    return corpus("fig8")


@pytest.fixture(scope="session")
def five2():
    return corpus("five2")


@pytest.fixture(scope="session")
def trefoil():
    return corpus("trefoil")
