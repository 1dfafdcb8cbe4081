"""Shared domain types and the peak-AoI assembly identity.

All powers are handled in linear milliwatts internally; dBm only appears on
:class:`SystemConfig` fields. Slot duration is normalized to one.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields, replace

RATE_EPS = 1e-9


class DomainError(ValueError):
    """Raised when an input lies outside the domain of a formula."""


def dbm_to_linear(x_dbm: float) -> float:
    """Convert a power in dBm to milliwatts."""
    if not math.isfinite(x_dbm):
        raise DomainError(f"power must be finite, got {x_dbm!r}")
    return 10.0 ** (x_dbm / 10.0)


def clamp_rate(x: float, name: str = "rate") -> float:
    """Clamp a generation rate into ``[RATE_EPS, 1 - RATE_EPS]``.

    The closed forms are continuous on the open unit interval; the clamp lets
    callers probe the ``p -> 0`` and ``p -> 1`` limits without special cases.
    A warning is issued whenever the value actually moves.
    """
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {x!r}")
    lo, hi = RATE_EPS, 1.0 - RATE_EPS
    if x < lo or x > hi:
        y = min(max(x, lo), hi)
        warnings.warn(f"{name}={x!r} clamped to {y!r}", RuntimeWarning, stacklevel=3)
        return y
    return x


def check_outage(x: float, name: str = "outage") -> float:
    if not (0.0 <= x < 1.0):
        raise DomainError(f"{name} must lie in [0, 1), got {x!r}")
    return x


@dataclass(frozen=True)
class SystemConfig:
    """Physical and protocol parameters of the primary/secondary pair.

    ``ic_over_n0`` is the interference cap at the primary access point as a
    multiple of the noise power. Rates ``r_p``/``r_s`` are in bits/slot/Hz and
    ``p``/``q`` are per-slot Bernoulli generation probabilities.
    """

    p_p_dbm: float = 25.0
    p_s_dbm: float = 25.0
    n0_dbm: float = -80.0
    ic_over_n0: float = 5.0
    r_p: float = 1.0
    r_s: float = 1.0
    d_pp: float = 100.0
    d_ss: float = 100.0
    d_sp: float = 100.0
    d_ps: float = 150.0
    omega: float = 3.0
    p: float = 0.1
    q: float = 0.1

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise DomainError(f"{f.name} must be a finite number, got {v!r}")
        if not (0.0 < self.p < 1.0):
            raise DomainError(f"p must lie in (0, 1), got {self.p}")
        if not (0.0 < self.q < 1.0):
            raise DomainError(f"q must lie in (0, 1), got {self.q}")
        for name in ("d_pp", "d_ss", "d_sp", "d_ps"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be positive")
        if not (2.0 <= self.omega <= 5.0):
            raise DomainError(f"omega must lie in [2, 5], got {self.omega}")
        if self.r_p <= 0 or self.r_s <= 0:
            raise DomainError("rates r_p and r_s must be positive")
        if self.ic_over_n0 <= 0:
            raise DomainError("ic_over_n0 must be positive")

    @property
    def sigma_p(self) -> float:
        return 2.0**self.r_p - 1.0

    @property
    def sigma_s(self) -> float:
        return 2.0**self.r_s - 1.0

    @property
    def pp_mw(self) -> float:
        return dbm_to_linear(self.p_p_dbm)

    @property
    def ps_mw(self) -> float:
        return dbm_to_linear(self.p_s_dbm)

    @property
    def n0_mw(self) -> float:
        return dbm_to_linear(self.n0_dbm)

    @property
    def ic_mw(self) -> float:
        return self.ic_over_n0 * self.n0_mw

    def with_(self, **changes) -> "SystemConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class PeakAoiBreakdown:
    """Expected interval lengths (slots) and the resulting average peak AoI."""

    e_w: float
    e_k: float
    e_y: float
    e_s: float
    avg_peak: float

    def as_dict(self) -> dict[str, float]:
        return {
            "e_w": self.e_w,
            "e_k": self.e_k,
            "e_y": self.e_y,
            "e_s": self.e_s,
            "avg_peak": self.avg_peak,
        }


def assemble_peak_aoi(e_s: float, e_w: float, e_k: float) -> PeakAoiBreakdown:
    """Combine service, waiting and busy means into the average peak AoI.

    Uses ``Y = W + K`` and ``peak = S + Y - 1``.
    """
    tol = 1e-9
    if not (e_s >= 1.0 - tol):
        raise DomainError(f"e_s must be >= 1, got {e_s}")
    if not (e_w >= -tol):
        raise DomainError(f"e_w must be >= 0, got {e_w}")
    if not (e_k >= 1.0 - tol):
        raise DomainError(f"e_k must be >= 1, got {e_k}")
    e_y = e_w + e_k
    return PeakAoiBreakdown(e_w=e_w, e_k=e_k, e_y=e_y, e_s=e_s, avg_peak=e_s + e_y - 1.0)
