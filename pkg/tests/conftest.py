import numpy as np
import pytest

from assetflow import FlowMode, load_scenario
from assetflow.model import with_group_values


@pytest.fixture(scope="session")
def oil():
    return load_scenario("oil_nigeria_libya")


@pytest.fixture(scope="session")
def oil_spec(oil):
    return oil.spec


@pytest.fixture(scope="session")
def oil_fixed(oil_spec):
    return oil_spec.with_mode(FlowMode.FIXED_ENDOWMENT)


def oil_at(spec, q1):
    return with_group_values(spec, "china", q1=q1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
