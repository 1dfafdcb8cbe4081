"""Slot-level Monte Carlo of the primary/secondary status-update system.

Per-slot order is fixed: generate -> medium access -> decode -> AoI update.

* Generation happens at the start of the slot. A new update preempts the one in
  service.
* Overlay: the primary transmits whenever it holds an update; the secondary
  transmits only if it holds an update and the primary is silent.
  Underlay: both transmit whenever they hold an update, and the secondary clips
  its power to ``min(I_C / H_SP, P_S)``.
* Decoding either draws fresh exponential power gains for the slot and compares
  SNR/SINR against ``2**R - 1`` (``mode="fading"``), or flips a coin with the
  matching outage probability (``mode="abstract"``).
* A success frees the transmitter. The AoI seen during the delivery slot is the
  peak, and the receiver age restarts from the delivered update's generation slot.

Randomness comes from independent substreams of one master seed, one per
source: generation P/S, abstract decode P/S, and the four link gains.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Literal

import numba
import numpy as np

from .core import SystemConfig
from .linkmodel import OutageSet, link_gains, outage_set

Scheme = Literal["overlay", "underlay"]
Mode = Literal["fading", "abstract"]

N_BATCHES = 64
DEFAULT_WARMUP = 10_000
CHUNK = 1 << 18
_MAX_SLOTS = 1 << 62

# substream indices
_GEN_P, _GEN_S, _DEC_P, _DEC_S, _H_PP, _H_SS, _H_SP, _H_PS = range(8)
_N_STREAMS = 8

# per-system state slots
_BUSY, _G, _R, _LAST_D, _HAVE_LAST, _FGA, _FGA_OB, _G_OB, _SEEN = range(9)
_NST = 9

# batch statistics columns
_BN, _BPEAK, _BW, _BK, _BY, _BS, _BPEAK2 = range(7)
_NB = 7

# counters
(
    _C_GENS,
    _C_GENS_OB,
    _C_DEL_I,
    _C_DEL_B,
    _C_KF_I,
    _C_TX,
    _C_EXPOSED,
    _C_SS_I,
    _C_W2,
    _C_K2,
    _C_Y2,
    _C_S2,
    _C_SUM_S_I,
    _C_SUM_S_B,
) = range(14)
_NC = 14

LOG_COLUMNS = ("system", "g", "d", "W", "K", "S", "Y", "peak")
SYSTEMS = ("primary", "secondary")


@numba.njit(cache=True, nogil=True)
def _run_chunk(
    t0,
    n,
    warmup,
    batch_len,
    underlay,
    fading,
    gen_p,
    gen_s,
    u_p,
    u_s,
    h_pp,
    h_ss,
    h_sp,
    h_ps,
    phi,
    phys,
    st,
    glob,
    batch,
    cnt,
    trans,
    occ,
    occ_batch,
    fmax,
    log,
    log_n,
    do_log,
):
    # phi = [phi_p_alone, phi_p_both, phi_s_alone, phi_s_both]
    # phys = [P_P, P_S, N0, I_C, sigma_p, sigma_s]
    pp, ps, n0, ic, sig_p, sig_s = phys[0], phys[1], phys[2], phys[3], phys[4], phys[5]
    for i in range(n):
        t = t0 + i
        post = t >= warmup
        b = 0
        if post:
            b = (t - warmup) // batch_len
            if b >= batch.shape[1]:
                b = batch.shape[1] - 1
        # 1. generation
        gens0 = gen_p[i]
        gens1 = gen_s[i]
        for z in range(2):
            g_now = gens0 if z == 0 else gens1
            if g_now:
                if st[z, _BUSY] == 0 and st[z, _FGA] < 0:
                    st[z, _FGA] = t
                st[z, _BUSY] = 1
                st[z, _G] = t
        for z in range(2):
            g_now = gens0 if z == 0 else gens1
            ob = st[1 - z, _BUSY]
            if g_now:
                st[z, _G_OB] = ob
                if st[z, _FGA] == t:
                    st[z, _FGA_OB] = ob
                if post:
                    cnt[z, _C_GENS] += 1
                    cnt[z, _C_GENS_OB] += ob
        # 2. joint state after generation
        s = st[0, _BUSY] + 2 * st[1, _BUSY]
        if post:
            occ[s] += 1
            occ_batch[b, s] += 1
            if glob[1] == 1:
                trans[glob[0], s] += 1
        glob[0] = s
        glob[1] = 1 if post else 0
        # 3. medium access
        tx0 = st[0, _BUSY] == 1
        tx1 = st[1, _BUSY] == 1 and (underlay or not tx0)
        if post:
            if tx0 and tx1:
                glob[2] += 1
            if tx0:
                cnt[0, _C_TX] += 1
                if tx1:
                    cnt[0, _C_EXPOSED] += 1
            if tx1:
                cnt[1, _C_TX] += 1
                if tx0:
                    cnt[1, _C_EXPOSED] += 1
        # 4. decode
        ok0 = False
        ok1 = False
        if fading:
            if tx0:
                interf = 0.0
                if tx1:
                    if underlay:
                        power = min(ic / h_sp[i], ps)
                        interf = power * h_sp[i]
                        if interf / ic > fmax[0]:
                            fmax[0] = interf / ic
                    else:
                        interf = ps * h_sp[i]
                ok0 = pp * h_pp[i] / (interf + n0) >= sig_p
            if tx1:
                power = ps
                if underlay:
                    power = min(ic / h_sp[i], ps)
                    if not tx0 and power * h_sp[i] / ic > fmax[0]:
                        fmax[0] = power * h_sp[i] / ic
                interf = pp * h_ps[i] if tx0 else 0.0
                ok1 = power * h_ss[i] / (interf + n0) >= sig_s
        else:
            if tx0:
                ok0 = u_p[i] >= (phi[1] if tx1 else phi[0])
            if tx1:
                ok1 = u_s[i] >= (phi[3] if tx0 else phi[2])
        # 5. deliveries
        for z in range(2):
            ok = ok0 if z == 0 else ok1
            if not ok:
                continue
            g = st[z, _G]
            d = t + 1
            if post and st[z, _HAVE_LAST] == 1:
                if st[z, _SEEN] == 1:
                    last_d = st[z, _LAST_D]
                    peak = t - st[z, _R]
                    s_val = d - g
                    y_val = d - last_d
                    w_val = st[z, _FGA] - last_d
                    k_val = d - st[z, _FGA]
                    batch[z, b, _BN] += 1
                    batch[z, b, _BPEAK] += peak
                    batch[z, b, _BPEAK2] += peak * peak
                    batch[z, b, _BW] += w_val
                    batch[z, b, _BK] += k_val
                    batch[z, b, _BY] += y_val
                    batch[z, b, _BS] += s_val
                    cnt[z, _C_W2] += w_val * w_val
                    cnt[z, _C_K2] += k_val * k_val
                    cnt[z, _C_Y2] += y_val * y_val
                    cnt[z, _C_S2] += s_val * s_val
                    if st[z, _FGA_OB] == 0:
                        cnt[z, _C_KF_I] += 1
                    if st[z, _G_OB] == 0:
                        cnt[z, _C_SS_I] += 1
                        cnt[z, _C_SUM_S_I] += s_val
                    else:
                        cnt[z, _C_SUM_S_B] += s_val
                    if do_log:
                        k = log_n[0]
                        log[k, 0] = z
                        log[k, 1] = g
                        log[k, 2] = d
                        log[k, 3] = w_val
                        log[k, 4] = k_val
                        log[k, 5] = s_val
                        log[k, 6] = y_val
                        log[k, 7] = peak
                        log_n[0] = k + 1
                st[z, _SEEN] = 1
            if g >= warmup:
                if st[z, _G_OB] == 0:
                    cnt[z, _C_DEL_I] += 1
                else:
                    cnt[z, _C_DEL_B] += 1
            st[z, _R] = g
            st[z, _LAST_D] = d
            st[z, _HAVE_LAST] = 1
            st[z, _BUSY] = 0
            st[z, _FGA] = -1


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float

    def z(self, target: float) -> float:
        if self.stderr == 0:
            return 0.0 if self.mean == target else math.inf
        return (self.mean - target) / self.stderr


@dataclass(frozen=True)
class SystemStats:
    """Empirical statistics of one system over the post-warm-up window."""

    peak_count: int
    mean_peak: float
    stderr: float
    stderr_iid: float
    w: Estimate
    k: Estimate
    y: Estimate
    s: Estimate
    exposure: float
    tx_slots: int
    gens: int
    gens_other_idle: int
    delivered_other_idle: int
    delivered_other_busy: int
    k_first_idle: int
    delivered_start_idle: int
    mean_s_start_idle: float
    mean_s_start_busy: float

    @property
    def peak(self) -> Estimate:
        return Estimate(self.mean_peak, self.stderr)

    @property
    def k_first_idle_frac(self) -> float:
        return self.k_first_idle / self.peak_count if self.peak_count else math.nan

    @property
    def delivered_start_idle_frac(self) -> float:
        return self.delivered_start_idle / self.peak_count if self.peak_count else math.nan

    @property
    def gen_idle_frac(self) -> float:
        return self.gens_other_idle / self.gens if self.gens else math.nan

    @property
    def phi_idle(self) -> float:
        """Fraction of updates generated while the other system was idle that got delivered."""
        return self.delivered_other_idle / self.gens_other_idle if self.gens_other_idle else math.nan

    @property
    def phi_busy(self) -> float:
        gb = self.gens - self.gens_other_idle
        return self.delivered_other_busy / gb if gb else math.nan


@dataclass
class SimReport:
    scheme: str
    mode: str
    slots: int
    warmup: int
    seed: int
    primary: SystemStats
    secondary: SystemStats
    transitions: np.ndarray
    occupancy: np.ndarray
    occupancy_batches: np.ndarray
    both_tx_slots: int
    max_interference_ratio: float
    events: np.ndarray | None = field(default=None, repr=False)

    def system(self, z: str) -> SystemStats:
        return self.primary if z == "primary" else self.secondary

    def write_event_log(self, path) -> None:
        if self.events is None:
            raise ValueError("simulation was run without an event log")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(LOG_COLUMNS)
            for row in self.events:
                w.writerow([SYSTEMS[row[0]], *(int(x) for x in row[1:])])

    def transition_frequencies(self) -> np.ndarray:
        rows = self.transitions.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(rows > 0, self.transitions / np.maximum(rows, 1), np.nan)

    def occupancy_estimate(self) -> list[Estimate]:
        tot = self.occupancy.sum()
        frac = self.occupancy / tot
        per = self.occupancy_batches / self.occupancy_batches.sum(axis=1, keepdims=True)
        nb = per.shape[0]
        se = per.std(axis=0, ddof=1) / math.sqrt(nb)
        return [Estimate(float(frac[i]), float(se[i])) for i in range(4)]


def _ratio_estimate(sums: np.ndarray, counts: np.ndarray) -> Estimate:
    """Ratio estimator with batch-means standard error."""
    keep = counts > 0
    sums, counts = sums[keep].astype(float), counts[keep].astype(float)
    tot = counts.sum()
    if tot == 0:
        return Estimate(math.nan, math.nan)
    r = sums.sum() / tot
    nb = len(counts)
    if nb < 2:
        return Estimate(r, math.nan)
    nbar = tot / nb
    resid = sums - r * counts
    se = math.sqrt((resid**2).sum() / (nb * (nb - 1))) / nbar
    return Estimate(r, se)


def _system_stats(batch: np.ndarray, cnt: np.ndarray) -> SystemStats:
    n = batch[:, _BN]
    tot = int(n.sum())
    peak = _ratio_estimate(batch[:, _BPEAK], n)
    if tot >= 2:
        m = batch[:, _BPEAK].sum() / tot
        var = (batch[:, _BPEAK2].sum() - tot * m * m) / (tot - 1)
        se_iid = math.sqrt(max(var, 0.0) / tot)
    else:
        se_iid = math.nan
    ss_i = int(cnt[_C_SS_I])
    ss_b = tot - ss_i
    return SystemStats(
        peak_count=tot,
        mean_peak=peak.mean,
        stderr=peak.stderr,
        stderr_iid=se_iid,
        w=_ratio_estimate(batch[:, _BW], n),
        k=_ratio_estimate(batch[:, _BK], n),
        y=_ratio_estimate(batch[:, _BY], n),
        s=_ratio_estimate(batch[:, _BS], n),
        exposure=float(cnt[_C_EXPOSED] / cnt[_C_TX]) if cnt[_C_TX] else math.nan,
        tx_slots=int(cnt[_C_TX]),
        gens=int(cnt[_C_GENS]),
        gens_other_idle=int(cnt[_C_GENS] - cnt[_C_GENS_OB]),
        delivered_other_idle=int(cnt[_C_DEL_I]),
        delivered_other_busy=int(cnt[_C_DEL_B]),
        k_first_idle=int(cnt[_C_KF_I]),
        delivered_start_idle=ss_i,
        mean_s_start_idle=float(cnt[_C_SUM_S_I] / ss_i) if ss_i else math.nan,
        mean_s_start_busy=float(cnt[_C_SUM_S_B] / ss_b) if ss_b else math.nan,
    )


def simulate(
    cfg: SystemConfig,
    scheme: Scheme = "overlay",
    mode: Mode = "fading",
    slots: int = 10**6,
    warmup: int = DEFAULT_WARMUP,
    seed: int = 0,
    outages: OutageSet | None = None,
    log_events: bool = False,
) -> SimReport:
    """Run one simulation and return its statistics.

    ``outages`` overrides the link-level probabilities in abstract mode, which
    lets the protocol layer be exercised with arbitrary outage values.
    """
    if scheme not in ("overlay", "underlay"):
        raise ValueError(f"unknown scheme {scheme!r}")
    if mode not in ("fading", "abstract"):
        raise ValueError(f"unknown mode {mode!r}")
    slots, warmup = int(slots), int(warmup)
    if warmup < 0 or slots <= warmup:
        raise ValueError(f"need slots > warmup >= 0, got slots={slots}, warmup={warmup}")
    if slots >= _MAX_SLOTS:
        raise OverflowError("slot count too large for the 64-bit slot counter")
    if outages is not None and mode != "abstract":
        raise ValueError("outage overrides only apply to abstract mode")
    underlay = scheme == "underlay"
    fading = mode == "fading"

    if outages is None:
        outages = outage_set(cfg)
    if underlay:
        phi = np.array([outages.phi_up, outages.phi_up_hat, outages.phi_us, outages.phi_us_hat])
    else:
        # overlay never overlaps; the "both" entries are unreachable
        phi = np.array([outages.phi_op, outages.phi_op, outages.phi_os, outages.phi_os])
    gains = link_gains(cfg)
    phys = np.array([cfg.pp_mw, cfg.ps_mw, cfg.n0_mw, cfg.ic_mw, cfg.sigma_p, cfg.sigma_s])

    streams = [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(_N_STREAMS)]

    post = slots - warmup
    n_batches = min(N_BATCHES, post)
    batch_len = -(-post // n_batches)
    st = np.zeros((2, _NST), dtype=np.int64)
    st[:, _FGA] = -1
    glob = np.zeros(3, dtype=np.int64)
    batch = np.zeros((2, n_batches, _NB), dtype=np.int64)
    cnt = np.zeros((2, _NC), dtype=np.int64)
    trans = np.zeros((4, 4), dtype=np.int64)
    occ = np.zeros(4, dtype=np.int64)
    occ_batch = np.zeros((n_batches, 4), dtype=np.int64)
    fmax = np.zeros(1)
    empty = np.zeros(0)
    logs = []

    t = 0
    while t < slots:
        n = min(CHUNK, slots - t)
        gen_p = streams[_GEN_P].random(n) < cfg.p
        gen_s = streams[_GEN_S].random(n) < cfg.q
        if fading:
            u_p = u_s = empty
            h_pp = streams[_H_PP].standard_exponential(n) * gains.omega_pp
            h_ss = streams[_H_SS].standard_exponential(n) * gains.omega_ss
            h_sp = streams[_H_SP].standard_exponential(n) * gains.omega_sp
            h_ps = streams[_H_PS].standard_exponential(n) * gains.omega_ps
        else:
            u_p = streams[_DEC_P].random(n)
            u_s = streams[_DEC_S].random(n)
            h_pp = h_ss = h_sp = h_ps = empty
        log = np.zeros((2 * n if log_events else 0, len(LOG_COLUMNS)), dtype=np.int64)
        log_n = np.zeros(1, dtype=np.int64)
        _run_chunk(
            t, n, warmup, batch_len, underlay, fading,
            gen_p, gen_s, u_p, u_s, h_pp, h_ss, h_sp, h_ps,
            phi, phys, st, glob, batch, cnt, trans, occ, occ_batch, fmax,
            log, log_n, log_events,
        )  # fmt: skip
        if log_events:
            logs.append(log[: log_n[0]])
        t += n

    return SimReport(
        scheme=scheme,
        mode=mode,
        slots=slots,
        warmup=warmup,
        seed=seed,
        primary=_system_stats(batch[0], cnt[0]),
        secondary=_system_stats(batch[1], cnt[1]),
        transitions=trans,
        occupancy=occ,
        occupancy_batches=occ_batch,
        both_tx_slots=int(glob[2]),
        max_interference_ratio=float(fmax[0]),
        events=np.concatenate(logs) if log_events else None,
    )


@dataclass(frozen=True)
class ModeAgreement:
    scheme: str
    z_primary: float
    z_secondary: float
    abstract: SimReport
    fading: SimReport

    @property
    def agree(self) -> bool:
        return abs(self.z_primary) < 3.0 and abs(self.z_secondary) < 3.0


def _joint_z(a: SystemStats, b: SystemStats) -> float:
    se = math.hypot(a.stderr, b.stderr)
    if se == 0 or math.isnan(se):
        return 0.0 if a.mean_peak == b.mean_peak else math.inf
    return (a.mean_peak - b.mean_peak) / se


def simulate_abstract_vs_fading(
    cfg: SystemConfig,
    scheme: Scheme,
    slots: int = 10**6,
    seed_pair: tuple[int, int] = (1, 2),
    warmup: int = DEFAULT_WARMUP,
) -> ModeAgreement:
    """Run both decode modes and compare mean peak AoI with a joint z-score."""
    ab = simulate(cfg, scheme, "abstract", slots, warmup, seed_pair[0])
    fa = simulate(cfg, scheme, "fading", slots, warmup, seed_pair[1])
    return ModeAgreement(
        scheme=scheme,
        z_primary=_joint_z(ab.primary, fa.primary),
        z_secondary=_joint_z(ab.secondary, fa.secondary),
        abstract=ab,
        fading=fa,
    )


@dataclass(frozen=True)
class TransitionLog:
    frequencies: np.ndarray
    counts: np.ndarray
    occupancy: list[Estimate]


def empirical_transition_log(
    cfg: SystemConfig,
    slots: int = 10**6,
    seed: int = 0,
    mode: Mode = "abstract",
    outages: OutageSet | None = None,
    warmup: int = DEFAULT_WARMUP,
) -> TransitionLog:
    """One-step frequencies between joint states s1..s4 under underlay access."""
    rep = simulate(cfg, "underlay", mode, slots, warmup, seed, outages=outages)
    return TransitionLog(
        frequencies=rep.transition_frequencies(),
        counts=rep.transitions.copy(),
        occupancy=rep.occupancy_estimate(),
    )
