import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from flowtile import build_schedule, default_params  # noqa: E402


@pytest.fixture(scope="session")
def params():
    return default_params()


@pytest.fixture(scope="session")
def schedule2(params):
    return build_schedule(params, depth=2)


@pytest.fixture(scope="session")
def schedule4(params):
    return build_schedule(params, depth=4)
