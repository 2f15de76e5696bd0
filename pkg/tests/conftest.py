import numpy as np
import pytest

from occamix import grid_from_rows


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def blank(rows=5, cols=5, cells=()):
    g = [[0] * cols for _ in range(rows)]
    for r, c, v in cells:
        g[r][c] = v
    return grid_from_rows(g)


# acceptance criteria report one line each, collected here and printed at the end
CRITERIA: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in CRITERIA:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
