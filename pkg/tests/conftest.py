import numpy as np
import pytest

from riskcost.market import DEFAULT_PARETO, generate_ensemble
from riskcost.scenario import build_wishart, generate_returns


def make_problem(n, alpha, seed, returns="gaussian"):
    ens = generate_ensemble(DEFAULT_PARETO, DEFAULT_PARETO, n, seed)
    J = build_wishart(generate_returns(ens, int(round(alpha * n)), seed, returns))
    return ens, J


@pytest.fixture
def problem():
    return make_problem


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.REPORT, key=lambda l: int(l.split("criterion ")[1].split(":")[0])):
        terminalreporter.write_line(line)
