import math

import pytest

from wignerkin import (CatStateParams, CatWigner, CoherentStateParams, CoherentWigner,
                       Convention, GridSpec, rasterize)

SQRT2 = math.sqrt(2.0)


@pytest.fixture(scope="session")
def default_spec():
    return GridSpec.symmetric(12.0, 1024)


@pytest.fixture(scope="session")
def cat_paper():
    return CatWigner(CatStateParams(SQRT2, 0.0, Convention.PAPER_SCALED))


@pytest.fixture(scope="session")
def cat_grid(cat_paper, default_spec):
    return rasterize(cat_paper, default_spec)


@pytest.fixture(scope="session")
def vacuum_grid(default_spec):
    return rasterize(CoherentWigner(CoherentStateParams(0.0, 0.0)), default_spec)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion, then assert it."""
    def record(number: int, ok: bool, detail: str) -> None:
        _ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
