import math

import numpy as np
import pytest
from scipy import special

from aoi_cr.core import DomainError, SystemConfig
from aoi_cr.linkmodel import (
    avg_gain,
    e1_scaled,
    expint_ei,
    expint_ei_scaled,
    link_gains,
    outage_overlay,
    outage_set,
    outage_underlay_primary_interf,
    outage_underlay_secondary,
    outage_underlay_secondary_interf,
)

from conftest import REF
from oracles import ei_quadrature, mc_outages


def test_avg_gain_examples():
    assert avg_gain(1e-9, 3) == pytest.approx(1e-3)
    assert avg_gain(1, 3) == pytest.approx(5e-4)
    assert avg_gain(100, 3) == pytest.approx(1e-3 / (1 + 1e6))
    with pytest.raises(DomainError):
        avg_gain(0, 3)


def test_link_gains_in_range():
    g = link_gains(SystemConfig())
    for v in (g.omega_pp, g.omega_ss, g.omega_sp, g.omega_ps):
        assert 0 < v <= 1e-3


@pytest.mark.parametrize("x", [-1.0, -0.1])
def test_ei_quadrature_examples(x):
    assert expint_ei(x) == pytest.approx(ei_quadrature(x), rel=1e-10)


def test_ei_log_grid_against_quadrature():
    for x in -np.logspace(-6, math.log10(50), 60):
        ref = ei_quadrature(float(x))
        assert expint_ei(float(x)) == pytest.approx(ref, rel=1e-10), x


def test_ei_against_scipy_and_scaled():
    for x in -np.logspace(-8, 2.5, 200):
        assert expint_ei(float(x)) == pytest.approx(special.expi(x), rel=1e-12)
        assert expint_ei_scaled(float(x)) == pytest.approx(-special.exp1(-x) * math.exp(-x), rel=1e-12)


@pytest.mark.parametrize("x", [1.5, 30.0, 9.9e7, 1e8, 3e8, 1e12, 2.3684013337281108e16, 1e300])
def test_e1_scaled_within_classical_bounds(x):
    # 0.5 ln(1 + 2/x) < exp(x) E1(x) < ln(1 + 1/x); the bracket narrows like 1/x^2
    lo, hi = 0.5 * math.log1p(2 / x), math.log1p(1 / x)
    v = e1_scaled(x)
    assert lo * (1 - 1e-15) <= v <= hi * (1 + 1e-15)


def test_ei_limits_and_domain():
    assert -1e-300 < expint_ei(-700.0) < 0
    # the scaled form stays finite where exp(eta) alone would overflow
    assert e1_scaled(1e6) == pytest.approx(1e-6, rel=1e-5)
    for bad in (0.0, 1.0):
        with pytest.raises(DomainError):
            expint_ei(bad)
        with pytest.raises(DomainError):
            expint_ei_scaled(bad)


def test_overlay_outage_half():
    c = SystemConfig()
    g = link_gains(c)
    pp_mw = c.n0_mw * c.sigma_p / (g.omega_pp * math.log(2))
    c = c.with_(p_p_dbm=10 * math.log10(pp_mw))
    assert outage_overlay(c)[0] == pytest.approx(0.5, rel=1e-12)


def test_overlay_outage_high_power():
    assert outage_overlay(SystemConfig(p_p_dbm=200, p_s_dbm=200)) == pytest.approx((0.0, 0.0), abs=1e-15)


def test_underlay_secondary_limits():
    c = SystemConfig(ic_over_n0=1e14)
    assert outage_underlay_secondary(c) == pytest.approx(outage_overlay(c)[1], rel=1e-9)
    assert outage_underlay_secondary(SystemConfig(p_s_dbm=150)) > 0


def test_primary_interf_limits():
    c = SystemConfig(ic_over_n0=1e-12)
    assert outage_underlay_primary_interf(c) == pytest.approx(outage_overlay(c)[0], rel=1e-9)
    assert outage_underlay_primary_interf(SystemConfig(r_p=1e-12)) == pytest.approx(0, abs=1e-9)


def test_secondary_interf_limits():
    c = SystemConfig(d_ps=1e7)
    assert outage_underlay_secondary_interf(c) == pytest.approx(outage_underlay_secondary(c), rel=1e-9)
    assert outage_underlay_secondary_interf(SystemConfig(r_s=1e-12)) == pytest.approx(0, abs=1e-9)


def test_secondary_interf_strong_interference_is_finite():
    # eta is huge here; a naive exp(eta) * Ei(-eta) overflows
    c = SystemConfig(ic_over_n0=1e9, d_sp=10, d_ps=5, p_p_dbm=60)
    v = outage_underlay_secondary_interf(c)
    assert 0 <= v < 1 and math.isfinite(v)


def test_outage_set_identity_and_ordering():
    o = outage_set(REF)
    assert o.phi_up == o.phi_op
    assert o.phi_up_hat >= o.phi_up
    assert o.phi_us_hat >= o.phi_us >= o.phi_os


def test_outage_set_decoupled_limit():
    o = outage_set(SystemConfig(ic_over_n0=1e14, d_sp=1e7, d_ps=1e7))
    assert o.phi_up_hat == pytest.approx(o.phi_up, rel=1e-9)
    assert o.phi_us == pytest.approx(o.phi_os, rel=1e-9)
    assert o.phi_us_hat == pytest.approx(o.phi_us, rel=1e-9)


def test_reference_config_values():
    o = outage_set(REF)
    assert o.phi_op == pytest.approx(0.031128, abs=1e-6)
    assert o.phi_us == pytest.approx(0.28212, abs=1e-5)
    assert o.phi_up_hat == pytest.approx(0.167385, abs=1e-6)
    assert o.phi_us_hat == pytest.approx(0.714581, abs=1e-6)


@pytest.mark.parametrize(
    "cfg",
    [
        SystemConfig(),
        REF,
        SystemConfig(p_p_dbm=15, p_s_dbm=30, d_sp=40, d_ps=60, ic_over_n0=30),
    ],
)
def test_outages_against_fading_monte_carlo(cfg):
    mc = mc_outages(cfg, 10**7, seed=17)
    o = outage_set(cfg).as_dict()
    for name, (m, se) in mc.items():
        assert abs(o[name] - m) <= 3 * se, (name, o[name], m, se)
