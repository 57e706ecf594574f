import sys
from pathlib import Path

import pytest
from hypothesis import settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from rank1 import algebraic_schedule, explicit_schedule, sidon_growth_schedule  # noqa: E402
from rank1.tower import LevelSet  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def sidon_sched():
    return sidon_growth_schedule(1, (3, 4, 5, 6), growth_factor=2)


@pytest.fixture(scope="session")
def alg_sched():
    return algebraic_schedule(0, (5, 11, 23, 47))


@pytest.fixture(scope="session")
def alg_tall():
    return algebraic_schedule(0, (5, 7, 11, 13, 17), s_last="height")


@pytest.fixture(scope="session")
def hand_sched():
    """h1=0, stage 1 (r=2, s=(1,0)), stage 2 (r=2, s=(5,5)); heights 0, 2, 15."""
    return explicit_schedule(0, [(2, (1, 0)), (2, (5, 5))])


@st.composite
def small_schedules(draw, max_stages=3, max_r=4, max_spacer=6):
    """Random explicit schedules small enough for brute-force oracles."""
    h1 = draw(st.integers(0, 3))
    n = draw(st.integers(1, max_stages))
    stages = []
    for _ in range(n):
        r = draw(st.integers(2, max_r))
        stages.append((r, tuple(draw(st.lists(st.integers(0, max_spacer), min_size=r, max_size=r)))))
    return explicit_schedule(h1, stages)


@st.composite
def level_sets(draw, schedule, stage):
    h = schedule.h(stage)
    levels = draw(st.lists(st.integers(0, h), min_size=1, max_size=min(h + 1, 10), unique=True))
    return LevelSet(stage, tuple(levels))


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
