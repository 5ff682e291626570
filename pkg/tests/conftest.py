"""Shared fixtures and the acceptance summary section."""

import sys

import pytest

import hawkesmix as hm


@pytest.fixture(scope="session")
def d1_model():
    """One-component model with exponential excitation, mean rate 2."""
    return hm.HawkesModel([1.0], [[hm.ExponentialKernel(0.5, 2.0)]])


@pytest.fixture(scope="session")
def d2_model():
    """Two-component model with reproduction matrix [[.5, .3], [.2, .4]]."""
    return hm.HawkesModel(
        [1.0, 1.0],
        [
            [hm.ExponentialKernel(0.5, 2.0), hm.ExponentialKernel(0.3, 1.0)],
            [hm.UniformKernel(0.2, 1.0), hm.ExponentialKernel(0.4, 3.0)],
        ],
    )


@pytest.fixture(scope="session")
def poisson2_model():
    """Two independent unit-rate Poisson components (no excitation)."""
    return hm.HawkesModel([1.0, 1.0], hm.zero_coupling(2))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", []) if mod else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
