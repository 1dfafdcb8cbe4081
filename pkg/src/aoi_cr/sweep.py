"""Config files, parameter sweeps and analytic-vs-simulation comparison tables.

Config files are flat ``key = value`` text with ``#`` comments. Keys are the
:class:`SystemConfig` field names; a recipe may also carry the run keys
``sweep``, ``scheme``, ``engine``, ``slots``, ``seed``, ``mode`` and
``with_exposure``.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .asymptotics import asym_peak_primary, asym_peak_secondary_overlay, asym_peak_secondary_underlay
from .core import DomainError, PeakAoiBreakdown, SystemConfig
from .linkmodel import outage_set
from .overlay import peak_aoi_overlay_primary, peak_aoi_overlay_secondary
from .simulator import SYSTEMS, simulate
from .underlay import peak_aoi_underlay

SWEEPABLE = ("p_p_dbm", "p_s_dbm", "p", "q", "ic_over_n0", "d_sp", "d_ps")
SCHEMES = ("overlay", "underlay")
ENGINES = ("analytic", "asymptotic", "simulate")
CSV_COLUMNS = ("param", "value", "scheme", "engine", "system", "e_w", "e_k", "e_y", "e_s", "avg_peak", "stderr", "seed")
_CFG_FIELDS = {f.name for f in fields(SystemConfig)}
_RUN_KEYS = {"sweep", "scheme", "engine", "slots", "seed", "mode", "with_exposure"}


class ConfigError(DomainError):
    """Malformed config or sweep description; ``line`` is 1-based when known."""

    def __init__(self, msg: str, line: int | None = None, source: str | None = None):
        where = ""
        if source is not None:
            where = f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {msg}" if where else msg)
        self.line = line


# -- parsing ------------------------------------------------------------------


def parse_config_text(text: str, source: str | None = None) -> tuple[dict[str, float], dict[str, str]]:
    """Split a config file into SystemConfig overrides and run options."""
    params: dict[str, float] = {}
    run: dict[str, str] = {}
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno, source)
        key, val = (s.strip() for s in line.split("=", 1))
        if not key or not val:
            raise ConfigError(f"empty key or value in {raw.strip()!r}", lineno, source)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r}", lineno, source)
        seen.add(key)
        if key in _CFG_FIELDS:
            try:
                num = float(val)
            except ValueError:
                raise ConfigError(f"{key} must be a number, got {val!r}", lineno, source) from None
            if not math.isfinite(num):
                raise ConfigError(f"{key} must be finite, got {val!r}", lineno, source)
            params[key] = num
        elif key in _RUN_KEYS:
            run[key] = val
        else:
            raise ConfigError(f"unknown key {key!r}", lineno, source)
    return params, run


def load_config(path) -> tuple[SystemConfig, dict[str, str]]:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", source=str(path)) from None
    params, run = parse_config_text(text, str(path))
    try:
        cfg = SystemConfig(**params)
    except DomainError as exc:
        raise ConfigError(str(exc), source=str(path)) from None
    return cfg, run


@dataclass(frozen=True)
class Grid:
    param: str
    lo: float
    hi: float
    steps: int

    def __post_init__(self) -> None:
        if self.param not in SWEEPABLE:
            raise ConfigError(f"cannot sweep {self.param!r}; choose one of {', '.join(SWEEPABLE)}")
        if not self.lo < self.hi:
            raise ConfigError(f"sweep min must be below max, got {self.lo} >= {self.hi}")
        if self.steps < 2:
            raise ConfigError(f"sweep needs at least 2 steps, got {self.steps}")

    @classmethod
    def parse(cls, text: str) -> "Grid":
        parts = text.split(":")
        if len(parts) != 4:
            raise ConfigError(f"sweep must look like param:min:max:steps, got {text!r}")
        try:
            lo, hi, steps = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError:
            raise ConfigError(f"bad numbers in sweep {text!r}") from None
        return cls(parts[0].strip(), lo, hi, steps)

    def values(self) -> list[float]:
        # 12 significant digits keeps 0.45 from printing as 0.44999999999999996
        return [float(f"{v:.12g}") for v in np.linspace(self.lo, self.hi, self.steps)]


def parse_schemes(text: str) -> tuple[str, ...]:
    if text == "both":
        return SCHEMES
    if text in SCHEMES:
        return (text,)
    raise ConfigError(f"scheme must be overlay, underlay or both, got {text!r}")


def parse_engines(text: str) -> tuple[str, ...]:
    if text == "all":
        return ENGINES
    out = tuple(e.strip() for e in text.split(","))
    for e in out:
        if e not in ENGINES:
            raise ConfigError(f"engine must be one of {', '.join(ENGINES)} or all, got {e!r}")
    return out


@dataclass(frozen=True)
class SweepSpec:
    base: SystemConfig
    grid: Grid
    schemes: tuple[str, ...] = SCHEMES
    engines: tuple[str, ...] = ("analytic",)
    slots: int = 10**6
    seed: int = 0
    mode: str = "fading"
    with_exposure: bool = False

    def __post_init__(self) -> None:
        if self.mode not in ("fading", "abstract"):
            raise ConfigError(f"mode must be fading or abstract, got {self.mode!r}")
        if self.slots < 2:
            raise ConfigError("slots must be at least 2")
        for v in (self.grid.lo, self.grid.hi):
            try:
                replace(self.base, **{self.grid.param: v})
            except DomainError as exc:
                raise ConfigError(f"sweep endpoint {self.grid.param}={v}: {exc}") from None

    def point_seed(self, index: int) -> int:
        return self.seed + index


def spec_from_options(cfg: SystemConfig, run: dict[str, str], **overrides) -> SweepSpec:
    """Merge recipe run keys with explicit overrides (``None`` means not given)."""
    opts = dict(run)
    opts.update({k: v for k, v in overrides.items() if v is not None})
    if "sweep" not in opts:
        raise ConfigError("no sweep given: use --sweep param:min:max:steps or a 'sweep' key")
    try:
        return SweepSpec(
            base=cfg,
            grid=opts["sweep"] if isinstance(opts["sweep"], Grid) else Grid.parse(str(opts["sweep"])),
            schemes=parse_schemes(str(opts.get("scheme", "both"))),
            engines=parse_engines(str(opts.get("engine", "analytic"))),
            slots=int(opts.get("slots", 10**6)),
            seed=int(opts.get("seed", 0)),
            mode=str(opts.get("mode", "fading")),
            with_exposure=_truthy(opts.get("with_exposure", False)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def _truthy(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {v!r}")


# -- evaluation ---------------------------------------------------------------


def analytic_breakdown(cfg: SystemConfig, scheme: str, system: str) -> PeakAoiBreakdown:
    o = outage_set(cfg)
    if scheme == "overlay":
        if system == "primary":
            return peak_aoi_overlay_primary(cfg.p, o.phi_op)
        return peak_aoi_overlay_secondary(cfg.p, cfg.q, o.phi_op, o.phi_os)
    return peak_aoi_underlay(system, cfg, o)


def asymptotic_peak(cfg: SystemConfig, scheme: str, system: str) -> float:
    if system == "primary":
        return asym_peak_primary(cfg.p)
    o = outage_set(cfg)
    if scheme == "overlay":
        return asym_peak_secondary_overlay(cfg.p, cfg.q, o.phi_os)
    return asym_peak_secondary_underlay(cfg.p, cfg.q, o.phi_us, o.phi_us_hat)


@dataclass
class Row:
    param: str
    value: float | str
    scheme: str
    engine: str
    system: str
    e_w: float | None = None
    e_k: float | None = None
    e_y: float | None = None
    e_s: float | None = None
    avg_peak: float | None = None
    stderr: float | None = None
    seed: int | None = None
    exposure: float | None = field(default=None)

    def cells(self, with_exposure: bool) -> list[str]:
        vals = [getattr(self, c) for c in CSV_COLUMNS]
        if with_exposure:
            vals.append(self.exposure)
        return [_fmt(v) for v in vals]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def evaluate_point(
    cfg: SystemConfig,
    schemes,
    engines,
    param: str = "",
    value: float | str = "",
    slots: int = 10**6,
    seed: int = 0,
    mode: str = "fading",
) -> list[Row]:
    rows: list[Row] = []
    for scheme in schemes:
        for engine in engines:
            if engine == "simulate":
                rep = simulate(cfg, scheme, mode, slots, seed=seed)
                for name in SYSTEMS:
                    s = rep.system(name)
                    rows.append(Row(
                        param, value, scheme, engine, name,
                        float(s.w.mean), float(s.k.mean), float(s.y.mean), float(s.s.mean),
                        float(s.mean_peak), float(s.stderr), seed, float(s.exposure),
                    ))  # fmt: skip
                continue
            for name in SYSTEMS:
                if engine == "analytic":
                    b = analytic_breakdown(cfg, scheme, name)
                    rows.append(Row(param, value, scheme, engine, name, b.e_w, b.e_k, b.e_y, b.e_s, b.avg_peak))
                else:
                    rows.append(Row(param, value, scheme, engine, name, avg_peak=asymptotic_peak(cfg, scheme, name)))
    return rows


def worker_count(n_tasks: int) -> int:
    cap = os.environ.get("AOI_CR_THREADS")
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError:
            raise ConfigError(f"AOI_CR_THREADS must be an integer, got {cap!r}") from None
    return max(1, min(limit, n_tasks))


def run_sweep_rows(spec: SweepSpec) -> list[Row]:
    values = spec.grid.values()

    def task(i: int) -> list[Row]:
        cfg = replace(spec.base, **{spec.grid.param: values[i]})
        return evaluate_point(
            cfg, spec.schemes, spec.engines, spec.grid.param, values[i],
            spec.slots, spec.point_seed(i), spec.mode,
        )  # fmt: skip

    with ThreadPoolExecutor(max_workers=worker_count(len(values))) as pool:
        # map preserves grid order whatever the completion order
        chunks = list(pool.map(task, range(len(values))))
    return [r for c in chunks for r in c]


def rows_to_csv(rows: list[Row], with_exposure: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS + (("exposure",) if with_exposure else ()))
    for r in rows:
        w.writerow(r.cells(with_exposure))
    return buf.getvalue()


def run_sweep(spec: SweepSpec) -> str:
    """Evaluate the whole grid and return the CSV table as text."""
    return rows_to_csv(run_sweep_rows(spec), spec.with_exposure)


def read_sweep_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


# -- comparison ---------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    scheme: str
    system: str
    quantity: str
    analytic: float
    simulated: float
    stderr: float

    @property
    def z(self) -> float:
        if self.stderr == 0 or math.isnan(self.stderr):
            return 0.0 if math.isclose(self.analytic, self.simulated) else math.inf
        return (self.simulated - self.analytic) / self.stderr


def compare(
    cfg: SystemConfig,
    scheme: str = "overlay",
    slots: int = 10**6,
    seed: int = 0,
    mode: str = "fading",
) -> list[ComparisonRow]:
    """Analytic vs simulated interval means and peak AoI, with z-scores."""
    out: list[ComparisonRow] = []
    for sch in parse_schemes(scheme):
        rep = simulate(cfg, sch, mode, slots, seed=seed)
        for name in SYSTEMS:
            b = analytic_breakdown(cfg, sch, name)
            s = rep.system(name)
            sim = {"e_w": s.w, "e_k": s.k, "e_y": s.y, "e_s": s.s, "avg_peak": s.peak}
            for q, est in sim.items():
                out.append(ComparisonRow(sch, name, q, getattr(b, q), float(est.mean), float(est.stderr)))
    return out


def comparison_csv(rows: list[ComparisonRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("scheme", "system", "quantity", "analytic", "simulated", "stderr", "z"))
    for r in rows:
        w.writerow((r.scheme, r.system, r.quantity, repr(r.analytic), repr(r.simulated), repr(r.stderr), repr(r.z)))
    return buf.getvalue()
