import functools

import numpy as np
import pytest

from aoi_cr import SystemConfig, simulate
from aoi_cr.linkmodel import OutageSet

# P_P=25 dBm, P_S=25 dBm, d_SP=80, d_PS=150, q=0.1, I_C=5 N0
REF = SystemConfig(p_p_dbm=25, p_s_dbm=25, d_sp=80, d_ps=150, q=0.1, ic_over_n0=5)


def random_config(rng: np.random.Generator) -> SystemConfig:
    """Log-uniform draws over plausible link budgets."""

    def logu(lo, hi):
        return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))

    return SystemConfig(
        p_p_dbm=float(rng.uniform(10, 40)),
        p_s_dbm=float(rng.uniform(10, 40)),
        ic_over_n0=logu(1, 100),
        r_p=logu(0.5, 2),
        r_s=logu(0.5, 2),
        d_pp=logu(50, 150),
        d_ss=logu(50, 150),
        d_sp=logu(30, 300),
        d_ps=logu(30, 300),
        p=float(rng.uniform(0.05, 0.7)),
        q=float(rng.uniform(0.05, 0.7)),
    )


def zero_outages() -> OutageSet:
    return OutageSet(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


@functools.lru_cache(maxsize=None)
def cached_sim(cfg, scheme, mode, slots, seed, outages=None, log_events=False):
    return simulate(cfg, scheme, mode, slots, seed=seed, outages=outages, log_events=log_events)


def within(est_mean, est_se, target, k=3.0):
    return abs(est_mean - target) <= k * est_se


@pytest.fixture
def ref_cfg():
    return REF


ACCEPTANCE_LINES: list[str] = []


def report(line: str) -> None:
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
