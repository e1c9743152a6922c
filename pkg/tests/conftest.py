from pathlib import Path

import numpy as np
import pytest

from emt.economy import Economy, IdeationParams, NeedParams
from emt.scenario_io import parse_scenario

SCENARIOS = Path(__file__).resolve().parents[1] / "src" / "emt" / "scenarios"


@pytest.fixture(scope="session")
def demo_text() -> str:
    return (SCENARIOS / "demo.emt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def demo(demo_text):
    return parse_scenario(demo_text)


@pytest.fixture(scope="session")
def demo_bundle(demo):
    from emt.control import solve

    return solve(demo.economy(), demo.solver)


@pytest.fixture(scope="session")
def single_text() -> str:
    return (SCENARIOS / "single_need.emt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def single(single_text):
    return parse_scenario(single_text)


def make_econ(weights, deltas, phis=None, c0=1.0, lam=0.5, **kw) -> Economy:
    phis = phis if phis is not None else [1.0] * len(weights)
    needs = tuple(NeedParams(weight=w, delta=d, effectiveness=p) for w, d, p in zip(weights, deltas, phis))
    return Economy(needs, IdeationParams(c0, lam), **kw)


# acceptance criteria report: test_acceptance records one line per criterion here and the
# terminal summary prints them after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
