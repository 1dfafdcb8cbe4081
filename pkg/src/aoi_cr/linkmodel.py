"""Path loss, Rayleigh-fading outage probabilities and the exponential integral.

Every link is Rayleigh faded, so instantaneous power gains are exponential with
mean ``avg_gain(d, omega)``. A slot is in outage when the receiver SNR (or SINR)
falls below ``sigma = 2**R - 1``.

Overlay: both devices transmit at peak power and never overlap.
Underlay: the secondary clips its power to ``min(I_C / H_SP, P_S)`` so the
instantaneous interference at the primary access point never exceeds ``I_C``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import DomainError, SystemConfig

EULER_GAMMA = 0.57721566490153286061
_CF_MAX_ITER = 10_000
_CF_TINY = 1e-300
_EPS = 1e-16
# above this the four-term asymptotic series is exact to double precision,
# and the continued fraction can stall on rounding once b += 2 stops registering
_ASYMPTOTIC_FROM = 1e8


@dataclass(frozen=True)
class LinkGains:
    """Mean channel power gains for the four links."""

    omega_pp: float
    omega_ss: float
    omega_sp: float
    omega_ps: float


@dataclass(frozen=True)
class OutageSet:
    """Per-slot decode-failure probabilities.

    ``phi_up_hat``/``phi_us_hat`` apply when both systems transmit in the same
    slot (underlay only).
    """

    phi_op: float
    phi_os: float
    phi_up: float
    phi_us: float
    phi_up_hat: float
    phi_us_hat: float

    def __post_init__(self) -> None:
        for name in ("phi_op", "phi_os", "phi_up", "phi_us", "phi_up_hat", "phi_us_hat"):
            v = getattr(self, name)
            if not (0.0 <= v < 1.0):
                raise DomainError(f"{name} must lie in [0, 1), got {v!r}")

    def as_dict(self) -> dict[str, float]:
        return {
            "phi_op": self.phi_op,
            "phi_os": self.phi_os,
            "phi_up": self.phi_up,
            "phi_us": self.phi_us,
            "phi_up_hat": self.phi_up_hat,
            "phi_us_hat": self.phi_us_hat,
        }


def avg_gain(d: float, omega: float) -> float:
    """Mean power gain at distance ``d`` metres: 30 dB loss at 1 m, then ``d**omega``."""
    if not d > 0:
        raise DomainError(f"distance must be positive, got {d!r}")
    return 1e-3 / (1.0 + d**omega)


def link_gains(cfg: SystemConfig) -> LinkGains:
    return LinkGains(
        omega_pp=avg_gain(cfg.d_pp, cfg.omega),
        omega_ss=avg_gain(cfg.d_ss, cfg.omega),
        omega_sp=avg_gain(cfg.d_sp, cfg.omega),
        omega_ps=avg_gain(cfg.d_ps, cfg.omega),
    )


# -- exponential integral ----------------------------------------------------


def _e1_series(x: float) -> float:
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = 0.0
    term = 1.0
    k = 1
    while True:
        term *= -x / k
        contrib = term / k
        total += contrib
        if abs(contrib) < _EPS * abs(total) or k > 500:
            break
        k += 1
    return -EULER_GAMMA - math.log(x) - total


def _e1_scaled_asymptotic(x: float) -> float:
    # exp(x) E1(x) ~ (1/x) (1 - 1/x + 2/x^2 - 6/x^3), truncation error ~ 24/x^5
    u = 1.0 / x
    return u * (1.0 - u * (1.0 - u * (2.0 - 6.0 * u)))


def _e1_scaled_cf(x: float) -> float:
    # exp(x) E1(x) by modified Lentz on 1/(x+1- 1/(x+3- 4/(x+5- ...)))
    b = x + 1.0
    c = 1.0 / _CF_TINY
    d = 1.0 / b
    h = d
    for i in range(1, _CF_MAX_ITER):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"E1 continued fraction did not converge at x={x}")


def e1_scaled(x: float) -> float:
    """Return ``exp(x) * E1(x)`` for ``x > 0`` without forming ``exp(x)``."""
    if not x > 0:
        raise DomainError(f"E1 needs a positive argument, got {x!r}")
    if x >= _ASYMPTOTIC_FROM:
        return _e1_scaled_asymptotic(x)
    if x > 1.0:
        return _e1_scaled_cf(x)
    return math.exp(x) * _e1_series(x)


def expint_ei(x: float) -> float:
    """Exponential integral ``Ei(x)`` for ``x < 0``, where ``Ei(x) = -E1(-x)``."""
    if not x < 0:
        raise DomainError(f"expint_ei is defined here for x < 0 only, got {x!r}")
    y = -x
    if y > 1.0:
        return -math.exp(-y) * e1_scaled(y)
    return -_e1_series(y)


def expint_ei_scaled(x: float) -> float:
    """``exp(-x) * Ei(x)`` for ``x < 0``; finite even where ``exp(-x)`` overflows."""
    if not x < 0:
        raise DomainError(f"expint_ei_scaled is defined here for x < 0 only, got {x!r}")
    return -e1_scaled(-x)


# -- outage probabilities ----------------------------------------------------


def outage_overlay(cfg: SystemConfig) -> tuple[float, float]:
    """Peak-power outage of the primary and the secondary link."""
    g = link_gains(cfg)
    n0 = cfg.n0_mw
    phi_op = -math.expm1(-n0 * cfg.sigma_p / (cfg.pp_mw * g.omega_pp))
    phi_os = -math.expm1(-n0 * cfg.sigma_s / (cfg.ps_mw * g.omega_ss))
    return phi_op, phi_os


def outage_underlay_secondary(cfg: SystemConfig) -> float:
    """Secondary outage with power ``min(I_C/H_SP, P_S)`` and no primary interference."""
    g = link_gains(cfg)
    n0, ic, ps, sig = cfg.n0_mw, cfg.ic_mw, cfg.ps_mw, cfg.sigma_s
    b = sig * n0 / (ps * g.omega_ss)
    clip = ic / (ps * g.omega_sp)
    k = g.omega_ss * ic / (g.omega_sp * sig * n0)
    return -math.expm1(-b) + math.exp(-b - clip) / (k + 1.0)


def outage_underlay_primary_interf(cfg: SystemConfig) -> float:
    """Primary outage while the power-clipped secondary also transmits.

    Interference at the primary access point is ``min(I_C, P_S H_SP)``.
    """
    g = link_gains(cfg)
    n0, ic, ps, pp, sig = cfg.n0_mw, cfg.ic_mw, cfg.ps_mw, cfg.pp_mw, cfg.sigma_p
    x = pp * g.omega_pp
    a = pp * g.omega_pp / (ps * g.omega_sp * sig)
    capped = -math.expm1(-ic / (ps * g.omega_sp) - (ic + n0) * sig / x)
    free = -math.expm1(-n0 * sig / x)
    return (capped + a * free) / (1.0 + a)


def outage_underlay_secondary_interf(cfg: SystemConfig) -> float:
    """Secondary outage under primary interference, clipped secondary power.

    The tail integral reduces to ``exp(eta) * E1(eta)``, evaluated as a single
    scaled function so large ``eta`` cannot overflow.
    """
    g = link_gains(cfg)
    n0, ic, ps, pp, sig = cfg.n0_mw, cfg.ic_mw, cfg.ps_mw, cfg.pp_mw, cfg.sigma_s
    b = sig * n0 / (ps * g.omega_ss)
    clip = ic / (ps * g.omega_sp)
    ratio = sig * pp * g.omega_ps / (ps * g.omega_ss)
    eta = (ic * g.omega_ss / g.omega_sp + sig * n0) * (
        1.0 / (ps * g.omega_ss) + 1.0 / (pp * g.omega_ps * sig)
    )
    h = ic * g.omega_ss / (sig * pp * g.omega_ps * g.omega_sp)
    e_clip = math.exp(-clip)
    bracket = (ratio + e_clip) / (1.0 + ratio) - h * e_clip * e1_scaled(eta)
    return -math.expm1(-b) + math.exp(-b) * bracket


def outage_set(cfg: SystemConfig) -> OutageSet:
    phi_op, phi_os = outage_overlay(cfg)
    phi_us = outage_underlay_secondary(cfg)
    up_hat = outage_underlay_primary_interf(cfg)
    us_hat = outage_underlay_secondary_interf(cfg)
    # interference cannot help; guards last-ulp rounding only
    return OutageSet(
        phi_op=phi_op,
        phi_os=phi_os,
        phi_up=phi_op,
        phi_us=max(phi_us, phi_os),
        phi_up_hat=max(up_hat, phi_op),
        phi_us_hat=max(us_hat, phi_us),
    )
