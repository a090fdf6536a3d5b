from __future__ import annotations

import numpy as np
import pytest

from bousspec.coeffs import CoeffPair, TrigPoly, random_coeffs, single_harmonic_family


@pytest.fixture
def zero() -> CoeffPair:
    return CoeffPair.zero()


@pytest.fixture
def cos_p() -> CoeffPair:
    """p = 0.05 cos 2 pi x, q = 0."""
    return CoeffPair(TrigPoly.cos(1, 0.05), TrigPoly.zero())


@pytest.fixture
def generic() -> CoeffPair:
    return random_coeffs(np.random.default_rng(20240), 0.05, order=3)


@pytest.fixture
def family():
    return single_harmonic_family


def pytest_configure(config):
    config.acceptance = {}


@pytest.fixture(scope="session")
def acceptance_log(request) -> dict:
    return request.config.acceptance


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = getattr(config, "acceptance", {})
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(log):
        passed, detail = log[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
