from pathlib import Path

import pytest

from bnsl.instance import DomainState, load_scores

DATA = Path(__file__).parent / "data"
TOY = DATA / "toy.scores"

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def toy():
    return load_scores(TOY)


@pytest.fixture
def toy_root(toy):
    return DomainState.full(toy)


@pytest.fixture
def toy_path():
    return TOY


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
