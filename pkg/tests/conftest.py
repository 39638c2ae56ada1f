import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from exterior_burgers import (InitialDataSpec, ProblemParams, SchemeConfig, build_weight,  # noqa: E402
                              default_generator, default_grid, evolve, make_initial_data,
                              solve_stationary)
from exterior_burgers.evolution import uniform_snapshots  # noqa: E402

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def acceptance_log():
    def record(k: int, name: str, passed: bool, detail: str):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {k:2d} {name}: {detail}"
        ACCEPTANCE_LINES[k] = line
        print(line)
        return passed
    return record


@pytest.fixture(scope="session")
def params():
    return ProblemParams(4, 1.0, 1.0, 0.0, -1.0)


@pytest.fixture(scope="session")
def wave(params):
    return solve_stationary(params, default_grid(params, num=2000))


@pytest.fixture(scope="session")
def weight(wave, params):
    return build_weight(wave, default_generator(params))


@pytest.fixture(scope="session")
def evo_wave(params):
    return solve_stationary(params, default_grid(params, num=600, stretch=30.0))


@pytest.fixture(scope="session")
def bump_run(params, evo_wave):
    """Default bump perturbation evolved to T = 50 on the evolution grid."""
    v0 = make_initial_data(evo_wave, InitialDataSpec())
    scheme = SchemeConfig(snapshot_times=uniform_snapshots(50.0, 200))
    return evolve(params, evo_wave, v0, 50.0, scheme)
