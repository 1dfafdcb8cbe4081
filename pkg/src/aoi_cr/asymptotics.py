"""High-SNR simplifications and the overlay/underlay selection rule.

When the primary link is essentially error-free, the primary peak AoI becomes
``1/p`` under either scheme and the secondary expressions collapse to three
simple terms. The two secondary forms differ only in the per-slot success
probability the secondary sees, so they cross at a single primary rate ``p*``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import DomainError, check_outage, clamp_rate

Scheme = Literal["overlay", "underlay", "tie"]


@dataclass(frozen=True)
class SchemeComparison:
    p_star: float
    recommended: Scheme
    aoi_overlay: float
    aoi_underlay: float


def asym_peak_primary(p: float) -> float:
    p = clamp_rate(p, "p")
    return 1.0 / p


def _three_term(q: float, success: float) -> float:
    return (1.0 - 2.0 * q) / q + 1.0 / success + 1.0 / (q + (1.0 - q) * success)


def asym_peak_secondary_overlay(p: float, q: float, phi_os: float) -> float:
    p = clamp_rate(p, "p")
    q = clamp_rate(q, "q")
    check_outage(phi_os, "phi_os")
    # secondary succeeds only in slots the primary leaves free
    return _three_term(q, (1.0 - phi_os) * (1.0 - p))


def asym_peak_secondary_underlay(p: float, q: float, phi_us: float, phi_us_hat: float) -> float:
    p = clamp_rate(p, "p")
    q = clamp_rate(q, "q")
    check_outage(phi_us, "phi_us")
    check_outage(phi_us_hat, "phi_us_hat")
    blended = (1.0 - p) * (1.0 - phi_us) + p * (1.0 - phi_us_hat)
    return _three_term(q, blended)


def critical_rate(phi_os: float, phi_us: float, phi_us_hat: float) -> float:
    """Primary rate at which both schemes give the same asymptotic secondary AoI."""
    check_outage(phi_os, "phi_os")
    check_outage(phi_us_hat, "phi_us_hat")
    if not 0.0 <= phi_us <= 1.0:
        raise DomainError(f"phi_us must lie in [0, 1], got {phi_us}")
    if phi_os > phi_us:
        raise DomainError(
            f"overlay outage {phi_os} exceeds underlay outage {phi_us}; underlay power is capped"
        )
    num = phi_us - phi_os
    p_star = num / (1.0 - phi_us_hat + num)
    return float(np.clip(p_star, 0.0, 1.0))


def recommend_scheme(p: float, p_star: float) -> Scheme:
    if p < p_star:
        return "overlay"
    if p > p_star:
        return "underlay"
    return "tie"


def compare_schemes(p: float, q: float, phi_os: float, phi_us: float, phi_us_hat: float) -> SchemeComparison:
    p_star = critical_rate(phi_os, phi_us, phi_us_hat)
    return SchemeComparison(
        p_star=p_star,
        recommended=recommend_scheme(p, p_star),
        aoi_overlay=asym_peak_secondary_overlay(p, q, phi_os),
        aoi_underlay=asym_peak_secondary_underlay(p, q, phi_us, phi_us_hat),
    )
