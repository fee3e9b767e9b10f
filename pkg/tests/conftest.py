import numpy as np
import pytest

from soconverse.harness import SuiteConfig, Workspace


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", help="run the (3,3) slow tier")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: slow-tier checks (enable with --runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="slow tier; pass --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def ws23():
    return Workspace(SuiteConfig(l=2, q=3))


@pytest.fixture(scope="session")
def ws25():
    return Workspace(SuiteConfig(l=2, q=5))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def criterion():
    def record(k: int, ok: bool, detail: str):
        ACCEPTANCE_LINES[k] = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
