"""Property tests for the invariants that must hold on every valid input."""

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from aoi_cr.asymptotics import (
    asym_peak_secondary_overlay,
    asym_peak_secondary_underlay,
    critical_rate,
)
from aoi_cr.core import DomainError, SystemConfig
from aoi_cr.linkmodel import (
    OutageSet,
    outage_overlay,
    outage_set,
    outage_underlay_primary_interf,
    outage_underlay_secondary,
    outage_underlay_secondary_interf,
)
from aoi_cr.overlay import overlay_conditionals, peak_aoi_overlay_secondary
from aoi_cr.underlay import markov_model, peak_aoi_underlay

rates = st.floats(0.01, 0.99)
outage = st.floats(0.0, 0.95)

configs = st.builds(
    SystemConfig,
    p_p_dbm=st.floats(0, 50),
    p_s_dbm=st.floats(0, 50),
    n0_dbm=st.floats(-100, -60),
    ic_over_n0=st.floats(0.1, 1000),
    r_p=st.floats(0.1, 4),
    r_s=st.floats(0.1, 4),
    d_pp=st.floats(10, 300),
    d_ss=st.floats(10, 300),
    d_sp=st.floats(10, 500),
    d_ps=st.floats(10, 500),
    omega=st.floats(2, 5),
    p=rates,
    q=rates,
)

TOL = 1e-12


def outages_or_skip(cfg):
    # a link that rounds to certain outage has no finite AoI; outside the domain
    try:
        return outage_set(cfg)
    except DomainError:
        assume(False)


def nonincreasing(lo, hi):
    return hi <= lo + TOL


@settings(max_examples=300, deadline=None)
@given(configs)
def test_outage_set_invariants(cfg):
    o = outages_or_skip(cfg)
    assert o.phi_up == o.phi_op
    assert o.phi_up_hat >= o.phi_up
    assert o.phi_us_hat >= o.phi_us >= o.phi_os
    for v in o.as_dict().values():
        assert 0 <= v < 1


@settings(max_examples=200, deadline=None)
@given(configs, st.floats(0.1, 10))
def test_outages_nonincreasing_in_own_power(cfg, step):
    up_p = cfg.with_(p_p_dbm=cfg.p_p_dbm + step)
    up_s = cfg.with_(p_s_dbm=cfg.p_s_dbm + step)
    assert nonincreasing(outage_overlay(cfg)[0], outage_overlay(up_p)[0])
    assert nonincreasing(outage_overlay(cfg)[1], outage_overlay(up_s)[1])
    assert nonincreasing(outage_underlay_secondary(cfg), outage_underlay_secondary(up_s))
    assert nonincreasing(outage_underlay_primary_interf(cfg), outage_underlay_primary_interf(up_p))
    assert nonincreasing(outage_underlay_secondary_interf(cfg), outage_underlay_secondary_interf(up_s))


@settings(max_examples=200, deadline=None)
@given(configs, st.floats(1.01, 10))
def test_underlay_secondary_nonincreasing_in_cap(cfg, factor):
    more = cfg.with_(ic_over_n0=cfg.ic_over_n0 * factor)
    assert nonincreasing(outage_underlay_secondary(cfg), outage_underlay_secondary(more))


@settings(max_examples=200, deadline=None)
@given(configs, st.floats(0.01, 1.0))
def test_outages_nondecreasing_in_threshold_and_noise(cfg, step):
    base = outages_or_skip(cfg)
    harder = outages_or_skip(cfg.with_(r_p=cfg.r_p + step, r_s=cfg.r_s + step))
    # I_C is configured relative to N0; hold the absolute cap fixed
    noisier = outages_or_skip(cfg.with_(n0_dbm=cfg.n0_dbm + 10 * step, ic_over_n0=cfg.ic_over_n0 / 10**step))
    for name in ("phi_op", "phi_os", "phi_us", "phi_up_hat", "phi_us_hat"):
        assert getattr(harder, name) >= getattr(base, name) - TOL, name
        assert getattr(noisier, name) >= getattr(base, name) - TOL, name


@settings(max_examples=300, deadline=None)
@given(rates, rates, outage, outage)
def test_overlay_conditionals_invariants(p, q, a, b):
    c = overlay_conditionals(p, q, a, b)
    assert c.pr_iks + c.pr_bks == pytest.approx(1, abs=1e-12)
    assert c.pr_is + c.pr_bs == pytest.approx(1, abs=1e-12)
    assert c.pr_iss + c.pr_bss == pytest.approx(1, abs=1e-12)
    for v in (c.pr_iks, c.pr_is, c.pr_phi_i, c.pr_phi_b, c.pr_iss):
        assert -1e-15 <= v <= 1 + 1e-15
    assert c.pr_phi_i >= c.pr_phi_b - 1e-15
    assert c.e_ks_busy >= c.e_ks_idle >= 1 - 1e-12
    assert c.e_ss_busy >= c.e_ss_idle >= 1 - 1e-12
    assert peak_aoi_overlay_secondary(p, q, a, b).avg_peak >= 1


@settings(max_examples=300, deadline=None)
@given(rates, st.floats(0.001, 0.2), rates, outage, outage, st.floats(0.001, 0.04))
def test_overlay_secondary_monotone(p, dp, q, a, b, db):
    assume(p + dp < 0.99 and b + db < 0.99)
    base = peak_aoi_overlay_secondary(p, q, a, b).avg_peak
    rel = 1e-10 * base
    assert peak_aoi_overlay_secondary(p + dp, q, a, b).avg_peak >= base - rel
    assert peak_aoi_overlay_secondary(p, q, a, b + db).avg_peak >= base - rel


@st.composite
def outage_sets(draw):
    up = draw(outage)
    us = draw(outage)
    os_ = draw(st.floats(0, us)) if us > 0 else 0.0
    up_hat = draw(st.floats(up, 0.97))
    us_hat = draw(st.floats(us, 0.97))
    return OutageSet(up, os_, up, us, up_hat, us_hat)


@settings(max_examples=300, deadline=None)
@given(rates, rates, outage_sets())
def test_underlay_invariants(p, q, o):
    model = markov_model(p, q, o)
    assert np.all(model.m > 0) and np.all(model.m <= 1)
    assert np.abs(model.m.sum(axis=1) - 1).max() < 1e-12
    assert np.abs(model.pi @ model.m - model.pi).max() < 1e-12
    assert np.all(model.pi > 0)
    for z in ("primary", "secondary"):
        b = peak_aoi_underlay(z, (p, q), o)
        assert b.avg_peak >= 1 and b.e_s >= 1 - 1e-12 and b.e_k >= 1 - 1e-12
        assert b.e_y == pytest.approx(b.e_w + b.e_k, rel=1e-12)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(0, 0.95), min_size=3, max_size=3, unique=True), rates)
def test_critical_rate_properties(vals, q):
    a, b, c = sorted(vals)
    ps = critical_rate(a, b, c)
    assert 0 <= ps <= 1
    diff = asym_peak_secondary_overlay(ps, q, a) - asym_peak_secondary_underlay(ps, q, b, c)
    assert abs(diff) < 1e-9 * asym_peak_secondary_overlay(ps, q, a)


@settings(max_examples=200, deadline=None)
@given(rates, st.floats(0.001, 0.2), rates, outage, outage)
def test_asymptotics_nondecreasing_in_p(p, dp, q, b, extra):
    assume(p + dp < 0.99)
    c = min(b + extra, 0.97)
    assert asym_peak_secondary_overlay(p + dp, q, b) >= asym_peak_secondary_overlay(p, q, b)
    assert asym_peak_secondary_underlay(p + dp, q, b, c) >= asym_peak_secondary_underlay(p, q, b, c) - 1e-12
