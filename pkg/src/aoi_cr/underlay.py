"""Closed-form average peak AoI under underlay access.

Both systems may transmit at once, so their evolutions are coupled. The joint
busy/idle state at the start of a slot (after generation) is a four-state
Markov chain, in the order

    s1 = both idle, s2 = primary busy only, s3 = secondary busy only, s4 = both busy.

Interdeparture means follow from the stationary idle fraction of each system.
Service means use the same idle/busy-start conditioning as the overlay case,
except 'busy' now means the *other* system is transmitting.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import PeakAoiBreakdown, assemble_peak_aoi, check_outage, clamp_rate, SystemConfig
from .linkmodel import OutageSet

System = Literal["primary", "secondary"]

_ROW_TOL = 1e-12
_CROSS_RTOL = 1e-9


@dataclass(frozen=True)
class MarkovModel:
    m: np.ndarray
    pi: np.ndarray | None = None


@dataclass(frozen=True)
class UnderlayRoleParams:
    """Outage/rate parameters seen from one system's point of view.

    ``zeta`` (the other system's interference-free outage) is kept for
    completeness; none of the solved forms depend on it.
    """

    u: float
    v: float
    xi: float
    xi_hat: float
    zeta: float
    zeta_hat: float

    @classmethod
    def for_system(cls, z: System, p: float, q: float, outages: OutageSet) -> "UnderlayRoleParams":
        if z == "primary":
            return cls(p, q, outages.phi_up, outages.phi_up_hat, outages.phi_us, outages.phi_us_hat)
        if z == "secondary":
            return cls(q, p, outages.phi_us, outages.phi_us_hat, outages.phi_up, outages.phi_up_hat)
        raise ValueError(f"unknown system {z!r}")


def build_transition_matrix(p: float, q: float, outages: OutageSet) -> MarkovModel:
    p = clamp_rate(p, "p")
    q = clamp_rate(q, "q")
    up, us = outages.phi_up, outages.phi_us
    alpha = (1.0 - outages.phi_up_hat) * (1.0 - p)
    beta = (1.0 - outages.phi_us_hat) * (1.0 - q)
    p_stay = p + up - p * up
    s_stay = q + us - q * us
    m = np.array(
        [
            [(1 - p) * (1 - q), p * (1 - q), (1 - p) * q, p * q],
            [(1 - up) * (1 - p) * (1 - q), p_stay * (1 - q), (1 - up) * (1 - p) * q, p_stay * q],
            [(1 - p) * (1 - us) * (1 - q), p * (1 - us) * (1 - q), (1 - p) * s_stay, p * s_stay],
            [alpha * beta, (1 - alpha) * beta, alpha * (1 - beta), (1 - alpha) * (1 - beta)],
        ]
    )
    return MarkovModel(m=m)


def _solve_pivoting(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting for a small dense system."""
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    n = len(b)
    scale = np.abs(a).max()
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[piv, k]) <= 1e-14 * scale:
            raise np.linalg.LinAlgError("singular system: chain is not irreducible")
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            b[[k, piv]] = b[[piv, k]]
        for i in range(k + 1, n):
            f = a[i, k] / a[k, k]
            a[i, k:] -= f * a[k, k:]
            b[i] -= f * b[k]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - a[i, i + 1 :] @ x[i + 1 :]) / a[i, i]
    return x


def stationary_distribution(m: np.ndarray) -> np.ndarray:
    """Solve ``(M^T - I + B) pi = 1`` where ``B`` is all ones."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("transition matrix must be square")
    if np.any(m < -_ROW_TOL) or np.any(np.abs(m.sum(axis=1) - 1.0) > _ROW_TOL * n):
        raise ValueError("transition matrix is not row-stochastic")
    a = m.T - np.eye(n) + np.ones((n, n))
    return _solve_pivoting(a, np.ones(n))


def markov_model(p: float, q: float, outages: OutageSet) -> MarkovModel:
    m = build_transition_matrix(p, q, outages).m
    return MarkovModel(m=m, pi=stationary_distribution(m))


def idle_fraction(z: System, pi: np.ndarray) -> float:
    """Long-run fraction of slots in which system ``z`` has nothing to send."""
    return float(pi[0] + pi[2] if z == "primary" else pi[0] + pi[1])


def other_idle_fraction(z: System, pi: np.ndarray) -> float:
    """Probability that the other system is idle in a slot where ``z`` generates."""
    return float(pi[0] + pi[1] if z == "primary" else pi[0] + pi[2])


def e_y_underlay(z: System, p: float, q: float, pi: np.ndarray) -> tuple[float, float, float]:
    rate = clamp_rate(p if z == "primary" else q, "rate")
    e_w = (1.0 - rate) / rate
    e_y = float((1.0 - rate) / (rate * idle_fraction(z, pi)))
    return e_w, e_y - e_w, e_y


def phi_recursion_matrix(r: UnderlayRoleParams) -> tuple[np.ndarray, np.ndarray]:
    """System for P{delivered | generated while the other system is idle/busy}."""
    u, v, x, xh, zh = r.u, r.v, r.xi, r.xi_hat, r.zeta_hat
    m = np.array(
        [
            [1.0 - x * (1 - u) * (1 - v), -x * (1 - u) * v],
            [-xh * (1 - zh) * (1 - u) * (1 - v), 1.0 - xh * (1 - u) * (zh + (1 - zh) * v)],
        ]
    )
    return m, np.array([1.0 - x, 1.0 - xh])


def underlay_phi_conditionals(r: UnderlayRoleParams, check: bool = True) -> tuple[float, float]:
    u, v, x, xh, zh = r.u, r.v, r.xi, r.xi_hat, r.zeta_hat
    den = (1 - x * (1 - u) * (1 - v)) * (1 - xh * zh * (1 - u)) - xh * (1 - zh) * (1 - u) * v
    phi_i = ((1 - x) * (1 - xh * (1 - u) * (v + zh - v * zh)) + x * (1 - xh) * (1 - u) * v) / den
    phi_b = ((1 - xh) * (1 - x * (1 - u) * (1 - v)) + (1 - x) * xh * (1 - zh) * (1 - u) * (1 - v)) / den
    if check:
        sol = np.linalg.solve(*phi_recursion_matrix(r))
        _agree(phi_i, sol[0], "P{Phi | I}")
        _agree(phi_b, sol[1], "P{Phi | B}")
    return phi_i, phi_b


def service_recursion_matrix(r: UnderlayRoleParams, phi_i: float, phi_b: float):
    """System for the conditional mean service time of delivered updates."""
    u, v, x, xh, zh = r.u, r.v, r.xi, r.xi_hat, r.zeta_hat
    ratio = phi_b / phi_i
    c_ii = x * (1 - u) * (1 - v)
    c_ib = x * (1 - u) * v * ratio
    c_bb = xh * (1 - u) * (zh + (1 - zh) * v)
    c_bi = xh * (1 - zh) * (1 - u) * (1 - v) / ratio
    m = np.array([[1.0 - c_ii, -c_ib], [-c_bi, 1.0 - c_bb]])
    rhs = np.array([(1 - x) / phi_i + c_ii + c_ib, (1 - xh) / phi_b + c_bb + c_bi])
    return m, rhs


def service_conditionals(r: UnderlayRoleParams, phi_i: float, phi_b: float, check: bool = True):
    u, v, x, xh, zh = r.u, r.v, r.xi, r.xi_hat, r.zeta_hat
    ratio = phi_b / phi_i
    g = zh + v - v * zh
    den = 1 - x * (1 - u) * (1 - v) - xh * (1 - u) * (g - x * zh * (1 - u) * (1 - v))
    e_i = (1 - xh * (1 - u) * g + x * (1 - u) * v * ratio) / den
    e_b = (1 - x * (1 - u) * (1 - v) + xh * (1 - zh) * (1 - u) * (1 - v) / ratio) / den
    if check:
        sol = np.linalg.solve(*service_recursion_matrix(r, phi_i, phi_b))
        _agree(e_i, sol[0], "E[S | I]")
        _agree(e_b, sol[1], "E[S | B]")
    return e_i, e_b


def e_s_underlay(z: System, params: UnderlayRoleParams, pi: np.ndarray) -> float:
    phi_i, phi_b = underlay_phi_conditionals(params)
    e_i, e_b = service_conditionals(params, phi_i, phi_b)
    pr_i = other_idle_fraction(z, pi)
    pr_b = 1.0 - pr_i
    w_i = pr_i * phi_i
    w_b = pr_b * phi_b
    return (w_i * e_i + w_b * e_b) / (w_i + w_b)


def peak_aoi_underlay(z: System, cfg: SystemConfig | tuple[float, float], outages: OutageSet) -> PeakAoiBreakdown:
    """Average peak AoI of system ``z``; ``cfg`` may also be a bare ``(p, q)`` pair."""
    p, q = (cfg.p, cfg.q) if isinstance(cfg, SystemConfig) else cfg
    p = clamp_rate(p, "p")
    q = clamp_rate(q, "q")
    for name, val in outages.as_dict().items():
        check_outage(val, name)
    model = markov_model(p, q, outages)
    e_w, e_k, _ = e_y_underlay(z, p, q, model.pi)
    params = UnderlayRoleParams.for_system(z, p, q, outages)
    e_s = e_s_underlay(z, params, model.pi)
    return assemble_peak_aoi(e_s, e_w, e_k)


def _agree(a, b, what):
    if not np.isclose(a, b, rtol=_CROSS_RTOL, atol=1e-12):
        raise ArithmeticError(f"{what}: solved form {a!r} disagrees with recursion {b!r}")
