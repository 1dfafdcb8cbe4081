"""Closed-form average peak AoI under overlay access.

The primary is unaffected by the secondary, so its intervals are geometric.
The secondary may only transmit in slots where the primary is idle; its busy
period and service time are obtained by conditioning on whether the first slot
of the interval is idle or busy from the primary's point of view.

Each conditional pair is available both as the solution of its two-state
recursion (``*_recursion_matrix``) and as the explicit solved form. Public functions
return the explicit form and, when ``check=True``, assert that the two agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DomainError, PeakAoiBreakdown, assemble_peak_aoi, check_outage, clamp_rate

CROSS_CHECK_RTOL = 1e-9


@dataclass(frozen=True)
class OverlayConditionals:
    pr_iks: float
    pr_bks: float
    e_ks_idle: float
    e_ks_busy: float
    pr_is: float
    pr_bs: float
    pr_phi_i: float
    pr_phi_b: float
    pr_iss: float
    pr_bss: float
    e_ss_idle: float
    e_ss_busy: float


def _rates(p, q=None):
    p = clamp_rate(p, "p")
    if q is None:
        return p
    return p, clamp_rate(q, "q")


def _agree(a: float, b: float, what: str) -> None:
    if not np.isclose(a, b, rtol=CROSS_CHECK_RTOL, atol=1e-12):
        raise ArithmeticError(f"{what}: solved form {a!r} disagrees with recursion {b!r}")


def _solve2(a: np.ndarray, rhs: np.ndarray) -> tuple[float, float]:
    x = np.linalg.solve(a, rhs)
    return float(x[0]), float(x[1])


# -- primary -----------------------------------------------------------------


def pmf_geometric_wait(p: float, k: int) -> float:
    """P{W = k} for Bernoulli(p) generation; ``k = 0`` is allowed."""
    if k < 0:
        raise DomainError(f"waiting time must be >= 0, got {k}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"rate must lie in (0, 1), got {p}")
    return (1.0 - p) ** k * p


def pmf_busy_primary(phi: float, k: int) -> float:
    """P{K_P = k}: k - 1 failed attempts followed by a success."""
    if k < 1:
        raise DomainError(f"busy period must be >= 1, got {k}")
    check_outage(phi)
    return phi ** (k - 1) * (1.0 - phi)


def pmf_service_primary(p: float, phi: float, k: int) -> float:
    """P{S_P = k} for delivered primary updates (no preemption, then success)."""
    if k < 1:
        raise DomainError(f"service time must be >= 1, got {k}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"rate must lie in (0, 1), got {p}")
    check_outage(phi)
    return (phi * (1.0 - p)) ** (k - 1) * (1.0 - phi + p * phi)


def peak_aoi_overlay_primary(p: float, phi_op: float) -> PeakAoiBreakdown:
    p = _rates(p)
    phi = check_outage(phi_op, "phi_op")
    e_w = (1.0 - p) / p
    e_k = 1.0 / (1.0 - phi)
    e_s = 1.0 / (1.0 - phi + p * phi)
    return assemble_peak_aoi(e_s, e_w, e_k)


def peak_aoi_overlay_primary_explicit(p: float, phi_op: float) -> float:
    """Single-expression form of the primary peak AoI, used as a cross-check."""
    p = _rates(p)
    phi = check_outage(phi_op, "phi_op")
    return (phi - p * phi) / (1.0 - phi + p * phi) + (1.0 - phi + p * phi) / (p - p * phi)


# -- secondary: busy interval ------------------------------------------------


def overlay_ks_probabilities(p: float, q: float, phi_op: float) -> tuple[float, float]:
    """Probability that the first slot of the secondary busy interval is idle/busy.

    'Busy' means the primary transmits in that slot.
    """
    p, q = _rates(p, q)
    a = check_outage(phi_op, "phi_op")
    x = (1.0 - p) * (1.0 - a + a * q)
    pr_i = x / (x + p)
    return pr_i, p / (x + p)


def overlay_ks_probabilities_system(p: float, q: float, phi_op: float) -> tuple[float, float]:
    """Same quantity from the primary idle/busy chain seen by the waiting secondary."""
    p, q = _rates(p, q)
    a = check_outage(phi_op, "phi_op")
    # x_i = q + (1-q)[(1-p) x_i + p x_b];  x_b = (1-q)[(1-a)(1-p) x_i + (a+(1-a)p) x_b]
    m = np.array(
        [
            [1.0 - (1.0 - q) * (1.0 - p), -(1.0 - q) * p],
            [-(1.0 - q) * (1.0 - a) * (1.0 - p), 1.0 - (1.0 - q) * (a + (1.0 - a) * p)],
        ]
    )
    x_i, x_b = _solve2(m, np.array([q, 0.0]))
    # the slot after a secondary delivery starts with the primary idle
    pr_i = (1.0 - p) * x_i + p * x_b
    return pr_i, 1.0 - pr_i


def ks_recursion_matrix(p: float, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Linear system ``A @ [E_I, E_B] = rhs`` for the conditional busy-interval means."""
    # E_I = (1-b) + b(1-p)(1+E_I) + b p (1+E_B)
    # E_B = (1-a)(1-p)(1+E_I) + (a+(1-a)p)(1+E_B)
    m = np.array(
        [
            [1.0 - b * (1.0 - p), -b * p],
            [-(1.0 - a) * (1.0 - p), 1.0 - (a + (1.0 - a) * p)],
        ]
    )
    rhs = np.array([1.0, 1.0])
    return m, rhs


def overlay_ks_expectations(
    p: float, q: float, phi_op: float, phi_os: float, check: bool = True
) -> tuple[float, float, float]:
    """Conditional and unconditional mean of the secondary busy interval K_S."""
    p, q = _rates(p, q)
    a = check_outage(phi_op, "phi_op")
    b = check_outage(phi_os, "phi_os")
    den = (1.0 - a) * (1.0 - b) * (1.0 - p)
    e_idle = ((1.0 - a) * (1.0 - p) + b * p) / den
    e_busy = ((1.0 - a) * (1.0 - p) + 1.0 - b + b * p) / den
    if check:
        ri, rb = _solve2(*ks_recursion_matrix(p, a, b))
        _agree(e_idle, ri, "E[K_S | idle]")
        _agree(e_busy, rb, "E[K_S | busy]")
    pr_i, pr_b = overlay_ks_probabilities(p, q, a)
    return e_idle, e_busy, pr_i * e_idle + pr_b * e_busy


def e_y_secondary_overlay(p: float, q: float, phi_op: float, phi_os: float, check: bool = True) -> float:
    p, q = _rates(p, q)
    a = check_outage(phi_op, "phi_op")
    b = check_outage(phi_os, "phi_os")
    lead = (1.0 - p) * (1.0 - a + a * q) + p
    e_y = (1.0 - q) / q + 1.0 / (1.0 - b) + (p - a * b * p * (1.0 - p) * (1.0 - q)) / (
        (1.0 - a) * (1.0 - b) * (1.0 - p) * lead
    )
    if check:
        _, _, e_k = overlay_ks_expectations(p, q, a, b, check=True)
        _agree(e_y, (1.0 - q) / q + e_k, "E[Y_S]")
    return e_y


# -- secondary: service time -------------------------------------------------


def phi_recursion_matrix(p: float, q: float, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """System for P{delivered | generated in idle/busy slot}."""
    m = np.array(
        [
            [1.0 - b * (1.0 - p) * (1.0 - q), -b * p * (1.0 - q)],
            [-(1.0 - a) * (1.0 - p) * (1.0 - q), 1.0 - (a + (1.0 - a) * p) * (1.0 - q)],
        ]
    )
    return m, np.array([1.0 - b, 0.0])


def ss_recursion_matrix(
    p: float, q: float, a: float, b: float, phi_i: float, phi_b: float
) -> tuple[np.ndarray, np.ndarray]:
    """System for the conditional mean service time of delivered updates."""
    r = phi_b / phi_i
    c_ii = b * (1.0 - p) * (1.0 - q)
    c_ib = b * p * (1.0 - q) * r
    c_bi = (1.0 - a) * (1.0 - p) * (1.0 - q) / r
    c_bb = (a + p - p * a) * (1.0 - q)
    m = np.array([[1.0 - c_ii, -c_ib], [-c_bi, 1.0 - c_bb]])
    rhs = np.array([(1.0 - b) / phi_i + c_ii + c_ib, c_bi + c_bb])
    return m, rhs


def overlay_phi_conditionals(
    p: float, q: float, phi_op: float, phi_os: float, check: bool = True
) -> tuple[float, float, float, float, float, float]:
    """Returns ``(pr_phi_i, pr_phi_b, pr_is, pr_bs, pr_iss, pr_bss)``."""
    p, q = _rates(p, q)
    a = check_outage(phi_op, "phi_op")
    b = check_outage(phi_os, "phi_os")
    pr_bs = p / (1.0 - a + p * a)
    pr_is = 1.0 - pr_bs
    den = q / ((1.0 - b) * (1.0 - p) * (1.0 - q)) + 1.0 - a - q * a * b / (1.0 - b)
    phi_i = (q / ((1.0 - p) * (1.0 - q)) + 1.0 - a) / den
    phi_b = (1.0 - a) / den
    s = q + (1.0 - a) * (1.0 - p) * (1.0 - q)
    pr_iss = s / (s + p - p * q)
    pr_bss = (p - p * q) / (s + p - p * q)
    if check:
        ri, rb = _solve2(*phi_recursion_matrix(p, q, a, b))
        _agree(phi_i, ri, "P{Phi | I_S}")
        _agree(phi_b, rb, "P{Phi | B_S}")
        bayes = pr_is * phi_i / (pr_is * phi_i + pr_bs * phi_b)
        _agree(pr_iss, bayes, "P{I_SS}")
    return phi_i, phi_b, pr_is, pr_bs, pr_iss, pr_bss


def overlay_conditionals(p: float, q: float, phi_op: float, phi_os: float) -> OverlayConditionals:
    """Every intermediate probability and conditional mean of the secondary analysis."""
    p, q = _rates(p, q)
    pr_iks, pr_bks = overlay_ks_probabilities(p, q, phi_op)
    e_ki, e_kb, _ = overlay_ks_expectations(p, q, phi_op, phi_os)
    phi_i, phi_b, pr_is, pr_bs, pr_iss, pr_bss = overlay_phi_conditionals(p, q, phi_op, phi_os)
    e_si, e_sb = _ss_conditional(p, q, phi_op, phi_os, phi_i, phi_b)
    return OverlayConditionals(
        pr_iks=pr_iks,
        pr_bks=pr_bks,
        e_ks_idle=e_ki,
        e_ks_busy=e_kb,
        pr_is=pr_is,
        pr_bs=pr_bs,
        pr_phi_i=phi_i,
        pr_phi_b=phi_b,
        pr_iss=pr_iss,
        pr_bss=pr_bss,
        e_ss_idle=e_si,
        e_ss_busy=e_sb,
    )


def _ss_conditional(p, q, a, b, phi_i, phi_b, check=True):
    r = phi_b / phi_i
    s = q + (1.0 - a) * (1.0 - p) * (1.0 - q)
    e_si = (1.0 + b * p * (1.0 - q) * r / s) / (1.0 - b * (1.0 - q) * (1.0 - p + p * r))
    e_sb = e_si + 1.0 / s
    if check:
        ri, rb = _solve2(*ss_recursion_matrix(p, q, a, b, phi_i, phi_b))
        _agree(e_si, ri, "E[S_S | I]")
        _agree(e_sb, rb, "E[S_S | B]")
    return e_si, e_sb


def e_s_secondary_overlay(p: float, q: float, phi_op: float, phi_os: float, check: bool = True) -> float:
    p, q = _rates(p, q)
    a = check_outage(phi_op, "phi_op")
    b = check_outage(phi_os, "phi_os")
    num = q / (1.0 - q) + (1.0 - a) * (1.0 - p) + p * (1.0 - a * b * (1.0 - p) * (1.0 - q)) / (
        1.0 - a * (1.0 - p) * (1.0 - q)
    )
    den = q / (1.0 - q) + (1.0 - p) * (1.0 - a - b * (1.0 - a + a * q))
    e_s = num / den
    if check:
        phi_i, phi_b, _, _, pr_iss, pr_bss = overlay_phi_conditionals(p, q, a, b)
        e_si, e_sb = _ss_conditional(p, q, a, b, phi_i, phi_b)
        _agree(e_s, pr_iss * e_si + pr_bss * e_sb, "E[S_S]")
    return e_s


def peak_aoi_overlay_secondary(p: float, q: float, phi_op: float, phi_os: float) -> PeakAoiBreakdown:
    p, q = _rates(p, q)
    _, _, e_k = overlay_ks_expectations(p, q, phi_op, phi_os)
    e_y = e_y_secondary_overlay(p, q, phi_op, phi_os)
    e_s = e_s_secondary_overlay(p, q, phi_op, phi_os)
    e_w = (1.0 - q) / q
    out = assemble_peak_aoi(e_s, e_w, e_k)
    _agree(out.e_y, e_y, "E[Y_S] = E[W_S] + E[K_S]")
    return out
