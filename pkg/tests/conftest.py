import os
from pathlib import Path

import numpy as np
import pytest

REPO = Path(__file__).resolve().parents[1]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def movielens_path():
    """Location of MovieLens 100K ``u.data``; override with MOVIELENS_UDATA."""
    env = os.environ.get("MOVIELENS_UDATA")
    return Path(env) if env else REPO / "data" / "ml-100k" / "u.data"


@pytest.fixture(scope="session")
def udata_path():
    path = movielens_path()
    if not path.exists():
        pytest.skip(f"MovieLens 100K not found at {path}")
    return path


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "ACCEPTANCE_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
