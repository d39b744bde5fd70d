import random

import pytest

from quantpi.syntax import fresh_session

DEFAULT_SEED = 20240611

ACCEPTANCE_LINES: list[str] = []


def pytest_addoption(parser):
    parser.addoption("--seed", type=int, default=DEFAULT_SEED, help="seed for randomized tests")


@pytest.fixture
def seed(request) -> int:
    return request.config.getoption("--seed")


@pytest.fixture
def rng(seed, request) -> random.Random:
    # one stream per test, stable under reordering
    return random.Random(f"{seed}:{request.node.nodeid}")


@pytest.fixture(autouse=True)
def _fresh_names():
    with fresh_session():
        yield


@pytest.fixture
def acceptance():
    def record(number: int, passed: bool, text: str) -> None:
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {text}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
