from __future__ import annotations

import numpy as np
import pytest

from lfqsdc.harness.sweep import CodeLadder
from lfqsdc.ldpc.distribution import DegreeDistribution
from lfqsdc.ldpc.peg import construct_peg


@pytest.fixture(scope="session")
def code_3_6_1024():
    """Rate-1/2 regular PEG code at the block length the sweep uses."""
    return construct_peg(DegreeDistribution.regular(3, 6), 1024, np.random.default_rng(0))


@pytest.fixture(scope="session")
def code_3_6_96():
    return construct_peg(DegreeDistribution.regular(3, 6), 96, np.random.default_rng(1))


@pytest.fixture(scope="session")
def code_ladder():
    """The default three-rung ladder at n = 1024, shared by sweep tests."""
    return CodeLadder.build(seed=0)


_ACCEPTANCE: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    criterion = getattr(item.function, "criterion", None)
    if criterion is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        _ACCEPTANCE[criterion] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{_ACCEPTANCE[name]}  {name}")
