import functools
import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from presym import models  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"


@functools.lru_cache(maxsize=None)
def _model(name):
    return models.get_model(name)


@functools.lru_cache(maxsize=None)
def _stabilized(name, sode):
    return _model(name).stabilized(sode=sode)


@pytest.fixture(scope="session")
def model():
    return _model


@pytest.fixture(scope="session")
def stabilized():
    return _stabilized


@pytest.fixture(scope="session")
def golden_dir():
    return GOLDEN


# one summary line per acceptance criterion

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or rep.failed):
        return
    number, title = mark.args
    _, ok = _CRITERIA.get(number, (title, True))
    _CRITERIA[number] = (title, ok and rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}  {'PASS' if ok else 'FAIL'}  {title}")
