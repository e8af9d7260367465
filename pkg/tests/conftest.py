import sys

import numpy as np
import pytest

from splitflow.correlation import BiasTable, BiasTableConfig, build_bias_table
from splitflow.simulate import SimConfig, simulate


def pytest_terminal_summary(terminalreporter):
    # pick up the module instance the run actually executed, if any
    mod = sys.modules.get("tests.test_acceptance") or sys.modules.get(
        "test_acceptance"
    )
    lines = getattr(mod, "REPORT_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def tiny_table() -> BiasTable:
    """Small calibration table for plumbing tests, one length, two counts."""
    cfg = BiasTableConfig(
        gamma_grid=(0.3, 0.5, 0.7),
        n_eps_grid=(300_000,),
        n_st_grid=(50, 100),
        reps_short=3,
        reps_long=3,
    )
    return build_bias_table(cfg)


@pytest.fixture(scope="session")
def small_dp():
    return simulate(SimConfig(n_st=100, alpha=1.5, n_steps=300_000, seed=42))


@pytest.fixture(scope="session")
def synthetic_table() -> BiasTable:
    """Handcrafted table with a known affine response, for debias logic tests.

    Measured exponent = 0.6 * true + 0.05 at every length and count, offsets
    fixed at -0.2, so inverses are exact and easy to reason about.
    """
    cfg = BiasTableConfig(
        gamma_grid=(0.2, 0.5, 0.8),
        n_eps_grid=(1_000_000,),
        n_st_grid=(100,),
        reps_short=1,
        reps_long=1,
    )
    grid = np.array(cfg.gamma_grid)
    gm = (0.6 * grid + 0.05).reshape(-1, 1, 1)
    off = np.full_like(gm, -0.2)
    ones = np.ones_like(gm)
    return BiasTable(
        config=cfg,
        gamma_map={"acf": gm.copy(), "psd": gm.copy()},
        c0_offset={"acf": off.copy(), "psd": off.copy()},
        valid_fraction={"acf": ones.copy(), "psd": ones.copy()},
    )
