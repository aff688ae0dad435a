import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from soccerkg.builder import build_all  # noqa: E402
from soccerkg.ingest import load_dataset  # noqa: E402
from soccerkg.nl import Engine  # noqa: E402

FIXTURE = Path(__file__).resolve().parents[1] / "src" / "soccerkg" / "data" / "fixture"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE


@pytest.fixture(scope="session")
def dataset():
    return load_dataset(FIXTURE)


@pytest.fixture(scope="session")
def built(dataset):
    return build_all(dataset)


@pytest.fixture(scope="session")
def engine(built):
    return Engine(built)


def pytest_terminal_summary(terminalreporter):
    from criteria import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
