import json
from pathlib import Path

import pytest

from ecstore.catalogue import Catalogue
from ecstore.endpoint import EndpointDescriptor, EndpointSet

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def zfec_reference():
    return json.loads((FIXTURES / "zfec_reference.json").read_text())


def sim_endpoints(count=15, failing=(), **kwargs):
    descriptors = [
        EndpointDescriptor(f"se{i:02d}", failure_probability=1.0 if i in failing else 0.0,
                           rng_seed=i, **kwargs)
        for i in range(count)
    ]
    return EndpointSet(descriptors)


@pytest.fixture
def endpoints():
    return sim_endpoints()


@pytest.fixture
def catalogue():
    return Catalogue()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
