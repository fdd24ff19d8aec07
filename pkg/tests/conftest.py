import warnings

import pytest

warnings.filterwarnings("ignore", message=".*TBB.*")

# criterion number -> (passed, detail), filled by test_acceptance.py
CRITERIA: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def tower1_d2():
    from champagne.schedules import Schedule, default_weight

    s = Schedule.tower_family(1, 2)
    return s, default_weight(s)


@pytest.fixture(scope="session")
def tower1_k3_config(tower1_d2):
    from champagne.builder import build_ball_config

    s, w = tower1_d2
    return build_ball_config(s, w, 3, 3)
