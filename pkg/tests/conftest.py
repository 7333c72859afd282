import pytest

from helpers import FULL_VALUES, MockServer, quality_graph


@pytest.fixture
def full_graph():
    return quality_graph(FULL_VALUES)


@pytest.fixture(scope="module")
def server():
    srv = MockServer()
    yield srv
    srv.close()


ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
