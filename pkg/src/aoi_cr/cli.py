"""``aoi-cr`` command-line front end.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .asymptotics import compare_schemes
from .core import DomainError, SystemConfig
from .linkmodel import outage_set
from .simulator import SYSTEMS, simulate
from .sweep import (
    ConfigError,
    Grid,
    Row,
    comparison_csv,
    compare,
    evaluate_point,
    load_config,
    parse_engines,
    parse_schemes,
    rows_to_csv,
    run_sweep,
    spec_from_options,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, *, sim: bool = True) -> None:
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--scheme", choices=("overlay", "underlay", "both"), default=None)
    p.add_argument("--out", help="write output here instead of stdout")
    if sim:
        p.add_argument("--slots", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--mode", choices=("fading", "abstract"), default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="aoi-cr", description="Peak AoI of overlay/underlay cognitive-radio IoT links.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="closed-form results for one config")
    _common(a, sim=False)
    a.add_argument("--engine", choices=("analytic", "asymptotic", "all"), default="analytic")

    s = sub.add_parser("simulate", help="one Monte Carlo run")
    _common(s)
    s.add_argument("--events", help="write the per-delivery event log CSV here")
    s.add_argument("--with-exposure", action="store_true", help="append the interference-exposure column")

    c = sub.add_parser("compare", help="analytic vs simulated table with z-scores")
    _common(c)

    w = sub.add_parser("sweep", help="parameter sweep to CSV")
    _common(w)
    w.add_argument("--sweep", help="param:min:max:steps")
    w.add_argument("--engine", default=None, help="analytic, asymptotic, simulate, all, or a comma list")
    w.add_argument("--with-exposure", action="store_true", default=None)

    r = sub.add_parser("critical-rate", help="critical primary rate and recommended scheme")
    r.add_argument("--config", help="key = value config file")
    r.add_argument("--out")
    return ap


def _load(path) -> tuple[SystemConfig, dict[str, str]]:
    if path is None:
        return SystemConfig(), {}
    return load_config(path)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_analyze(args) -> None:
    cfg, run = _load(args.config)
    schemes = parse_schemes(args.scheme or run.get("scheme", "both"))
    engines = tuple(e for e in parse_engines(args.engine) if e != "simulate")
    rows = evaluate_point(cfg, schemes, engines)
    _emit(rows_to_csv(rows), args.out)


def _cmd_simulate(args) -> None:
    cfg, run = _load(args.config)
    schemes = parse_schemes(args.scheme or run.get("scheme", "both"))
    slots = args.slots if args.slots is not None else int(run.get("slots", 10**6))
    seed = args.seed if args.seed is not None else int(run.get("seed", 0))
    mode = args.mode or run.get("mode", "fading")
    if args.events and len(schemes) != 1:
        raise ConfigError("--events needs a single --scheme")
    rows = []
    for scheme in schemes:
        rep = simulate(cfg, scheme, mode, slots, seed=seed, log_events=bool(args.events))
        if args.events:
            rep.write_event_log(args.events)
        for name in SYSTEMS:
            st = rep.system(name)
            rows.append(Row(
                "", "", scheme, "simulate", name,
                float(st.w.mean), float(st.k.mean), float(st.y.mean), float(st.s.mean),
                float(st.mean_peak), float(st.stderr), seed, float(st.exposure),
            ))  # fmt: skip
    _emit(rows_to_csv(rows, args.with_exposure), args.out)


def _cmd_compare(args) -> None:
    cfg, run = _load(args.config)
    rows = compare(
        cfg,
        args.scheme or run.get("scheme", "both"),
        slots=args.slots if args.slots is not None else int(run.get("slots", 10**6)),
        seed=args.seed if args.seed is not None else int(run.get("seed", 0)),
        mode=args.mode or run.get("mode", "fading"),
    )
    _emit(comparison_csv(rows), args.out)


def _cmd_sweep(args) -> None:
    cfg, run = _load(args.config)
    spec = spec_from_options(
        cfg,
        run,
        sweep=Grid.parse(args.sweep) if args.sweep else None,
        scheme=args.scheme,
        engine=args.engine,
        slots=args.slots,
        seed=args.seed,
        mode=args.mode,
        with_exposure=args.with_exposure,
    )
    _emit(run_sweep(spec), args.out)


def _cmd_critical(args) -> None:
    cfg, _ = _load(args.config)
    o = outage_set(cfg)
    res = compare_schemes(cfg.p, cfg.q, o.phi_os, o.phi_us, o.phi_us_hat)
    lines = [
        "key,value",
        f"p_star,{res.p_star!r}",
        f"p,{cfg.p!r}",
        f"recommended,{res.recommended}",
        f"asym_overlay_secondary,{res.aoi_overlay!r}",
        f"asym_underlay_secondary,{res.aoi_underlay!r}",
        f"phi_os,{o.phi_os!r}",
        f"phi_us,{o.phi_us!r}",
        f"phi_us_hat,{o.phi_us_hat!r}",
    ]
    _emit("\n".join(lines) + "\n", args.out)


_COMMANDS = {
    "analyze": _cmd_analyze,
    "simulate": _cmd_simulate,
    "compare": _cmd_compare,
    "sweep": _cmd_sweep,
    "critical-rate": _cmd_critical,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with np.errstate(divide="raise", over="raise", invalid="raise"):
            _COMMANDS[args.command](args)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"aoi-cr: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DomainError, ValueError, OSError) as exc:
        print(f"aoi-cr: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
