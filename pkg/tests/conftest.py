import sys
from pathlib import Path

import pytest

from lobimpact.orderbook import available_backends, new_book

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(params=available_backends())
def backend(request):
    return request.param


@pytest.fixture
def book(backend):
    return new_book(backend)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
