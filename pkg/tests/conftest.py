"""Session fixtures: disk-cached H tables and the acceptance summary hook."""

from pathlib import Path

import pytest

from ladderlab.errors import CacheFormatError
from ladderlab.ladder import LadderTable, build_table, suggested_t_max

CACHE_DIR = Path(__file__).resolve().parent.parent / ".ladderlab-cache"

# One line per acceptance criterion, printed after the run so a red suite
# still reports every criterion's verdict in one place.
ACCEPTANCE_LINES: list[str] = []


def _cached_table(t_max: float) -> LadderTable:
    CACHE_DIR.mkdir(exist_ok=True)
    path = CACHE_DIR / f"h-table-{t_max:.3f}.csv"
    if path.exists():
        try:
            return LadderTable.load(path)
        except CacheFormatError:
            path.unlink()
    table = build_table(t_max)
    table.save(path)
    return table


@pytest.fixture(scope="session")
def unit_table() -> LadderTable:
    """Covers reverse iteration of [pi L, pi L + U] for L <= 1000."""
    return _cached_table(suggested_t_max(1000))


@pytest.fixture(scope="session")
def big_table() -> LadderTable:
    """Covers L <= 9000; ~3s cold, instant once cached."""
    return _cached_table(suggested_t_max(9000))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
