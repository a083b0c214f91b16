import math

import pytest

from crlhiso import crlh, device
from crlhiso.coupler import CoupledLineParams

W_OP = 2 * math.pi * 6e9

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def cell():
    return crlh.REFERENCE_CELL


@pytest.fixture(scope="session")
def coupled_off():
    return CoupledLineParams.from_cell(crlh.REFERENCE_CELL, 0.5e-12, 20e-15)


@pytest.fixture(scope="session")
def coupled_on():
    return CoupledLineParams.from_cell(crlh.REFERENCE_CELL, 105e-12, 20e-15)


@pytest.fixture(scope="session")
def default_spec():
    return device.DeviceSpec.build()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
