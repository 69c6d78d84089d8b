import functools
import os

import pytest
from hypothesis import settings

from belyi.passports import enumerate_degree

# fixed example order so that runs are reproducible
settings.register_profile("repro", derandomize=True)
settings.load_profile("repro")

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


@functools.lru_cache(maxsize=None)
def passports_of(d: int):
    return tuple(enumerate_degree(d))


@pytest.fixture(scope="session")
def small_passports():
    """All passports of degree 1..7."""
    return {d: passports_of(d) for d in range(1, 8)}


def find_passport(d, lam, group_order=None, genus=None):
    """The passport with cycle types ``lam`` up to order (and optional group order / genus)."""
    target = sorted(tuple(sorted(l, reverse=True)) for l in lam)
    hits = [p for p in passports_of(d)
            if sorted(tuple(l) for l in p.lam) == target
            and (group_order is None or p.group.order == group_order)
            and (genus is None or p.genus == genus)]
    return hits


# -- acceptance summary ---------------------------------------------------------

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _CRITERIA[n] = (title, "PASS" if rep.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, status = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d} {status}: {title}")
