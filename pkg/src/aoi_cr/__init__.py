"""Average peak AoI of a primary/secondary IoT pair under overlay and underlay access."""

from .asymptotics import (
    asym_peak_primary,
    asym_peak_secondary_overlay,
    asym_peak_secondary_underlay,
    compare_schemes,
    critical_rate,
)
from .core import DomainError, PeakAoiBreakdown, SystemConfig, assemble_peak_aoi, dbm_to_linear
from .linkmodel import OutageSet, expint_ei, outage_set
from .overlay import peak_aoi_overlay_primary, peak_aoi_overlay_secondary
from .simulator import SimReport, empirical_transition_log, simulate, simulate_abstract_vs_fading
from .sweep import SweepSpec, compare, run_sweep
from .underlay import build_transition_matrix, markov_model, peak_aoi_underlay, stationary_distribution

__all__ = [
    "DomainError",
    "OutageSet",
    "PeakAoiBreakdown",
    "SimReport",
    "SweepSpec",
    "SystemConfig",
    "asym_peak_primary",
    "asym_peak_secondary_overlay",
    "asym_peak_secondary_underlay",
    "assemble_peak_aoi",
    "build_transition_matrix",
    "compare",
    "compare_schemes",
    "critical_rate",
    "dbm_to_linear",
    "empirical_transition_log",
    "expint_ei",
    "markov_model",
    "outage_set",
    "peak_aoi_overlay_primary",
    "peak_aoi_overlay_secondary",
    "peak_aoi_underlay",
    "run_sweep",
    "simulate",
    "simulate_abstract_vs_fading",
    "stationary_distribution",
]
