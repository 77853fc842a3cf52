"""Shared fixtures.

The calibrated on-resonance burst is expensive enough (~1 s) that the
suite computes it once per session and shares the result.  Tests that
need a mutated configuration build their own via default_sim_config.
"""

import numpy as np
import pytest

from maserbench import calibration
from maserbench.dynamics import simulate_burst, synthesize_scope_trace


@pytest.fixture(scope="session")
def default_config():
    return calibration.default_sim_config()


@pytest.fixture(scope="session")
def default_env(default_config):
    return simulate_burst(default_config)


@pytest.fixture(scope="session")
def default_trace(default_config, default_env):
    # p_out_w is already the power at the output port; no extra loss here
    return synthesize_scope_trace(default_env, carrier_hz=default_config.resonator.f_spin_hz)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260819)
