"""Command-line interface: ``tcsflock {simulate,check,fit,oracle,sweep}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import ConfigError
from .config import PRESETS, ScenarioConfig, apply_overrides, load_config, preset
from .report import EXIT_USAGE, render_report
from .runner import VARIANTS, run_check, run_fit, run_oracle, run_simulate, run_sweep, sweep_exit_status


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so ``main`` controls the exit code."""

    def error(self, message):
        raise ConfigError(message)


def _float_list(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _scenario_options(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=sorted(PRESETS), help="built-in scenario (default: paper-sec6)")
    src.add_argument("--config", type=Path, help="scenario file with dotted key = value lines")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key, e.g. model.kappa1=2 (repeatable)")
    p.add_argument("--seed", type=int, help="shortcut for sampling.seed")
    p.add_argument("--eps", type=float, help="shortcut for analysis.eps")
    p.add_argument("--eps0", type=float, help="shortcut for analysis.eps0")
    p.add_argument("--t-end", type=float, help="shortcut for integrator.t_end")
    p.add_argument("--variant", choices=VARIANTS, default="theorem",
                   help="sufficient conditions to check (default: theorem)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tcsflock", description="Thermodynamic Cucker-Smale flocks in a harmonic well.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="integrate a scenario and verify the decay envelopes")
    _scenario_options(p)
    p.add_argument("--out", type=Path, default=Path("tcs-run"), help="output directory")

    p = sub.add_parser("check", help="evaluate the sufficient conditions only")
    _scenario_options(p)

    p = sub.add_parser("oracle", help="compare against the fluctuation system")
    _scenario_options(p)
    p.set_defaults(t_end=None)

    p = sub.add_parser("fit", help="decay-rate fits from a time-series file")
    p.add_argument("timeseries", type=Path)
    p.add_argument("--window", type=_float_list, metavar="T0,T1",
                   help="fit window (default: last half of the record)")

    p = sub.add_parser("sweep", help="simulate over a (kappa1, kappa2, eps0) grid")
    _scenario_options(p)
    p.add_argument("--kappa1", type=_float_list, help="comma-separated values (default: config value)")
    p.add_argument("--kappa2", type=_float_list, help="comma-separated values (default: config value)")
    p.add_argument("--eps0-grid", type=_float_list, help="comma-separated values (default: config value)")
    p.add_argument("--workers", type=int, help="parallel cells (default: TCS_WORKERS or core count)")
    p.add_argument("--out", type=Path, default=Path("tcs-sweep"), help="output directory")
    return parser


def scenario_from_args(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else preset(args.preset or "paper-sec6")
    overrides = list(args.overrides)
    for attr, key in (("seed", "sampling.seed"), ("eps", "analysis.eps"),
                      ("eps0", "analysis.eps0"), ("t_end", "integrator.t_end")):
        value = getattr(args, attr, None)
        if value is not None:
            overrides.append(f"{key}={value!r}")
    return apply_overrides(cfg, overrides)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "fit":
            window = tuple(args.window) if args.window else None
            if window is not None and len(window) != 2:
                raise ConfigError("--window expects two numbers T0,T1")
            report = run_fit(args.timeseries, window)
        else:
            cfg = scenario_from_args(args)
            if args.command == "check":
                report = run_check(cfg, args.variant)
            elif args.command == "simulate":
                report = run_simulate(cfg, args.out, args.variant)
            elif args.command == "oracle":
                report = run_oracle(cfg) if args.t_end is None else run_oracle(cfg, args.t_end)
            else:
                return _sweep(args, cfg)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"tcsflock: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(render_report(report), end="")
    return report.exit_status


def _sweep(args, cfg: ScenarioConfig) -> int:
    cells = run_sweep(cfg, args.kappa1 or [cfg.kappa1], args.kappa2 or [cfg.kappa2],
                      args.eps0_grid or [cfg.eps0], args.out, args.variant, args.workers)
    for c in cells:
        print(f"cell {c.index:03d} kappa1={c.kappa1:g} kappa2={c.kappa2:g} eps0={c.eps0:g} "
              f"exit={c.exit_status} -> {c.directory}")
    return sweep_exit_status(cells)


if __name__ == "__main__":
    sys.exit(main())
