"""Experiment drivers behind the CLI subcommands.

Each driver returns a :class:`RunReport` whose ``exit_status`` follows the
precedence numerical failure (4) > violation (2) > hypotheses unsatisfied (3) > ok (0).
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..analysis import (
    check_remark_5_5,
    check_theorem_5_1,
    compute_constants,
    fit_exponential,
    guaranteed_rates,
    initial_norms,
    verify_decay_bounds,
)
from ..diagnostics import (
    Recorder,
    center_of_mass_deviation,
    compare_with_oracle,
    dissipative_inequality_check,
    energy_drift,
    integrate_fluctuations,
)
from ..errors import NumericalFailure
from ..integrator import Trajectory, integrate
from ..model import conserved_quantities
from .config import ScenarioConfig
from .io import read_timeseries, write_timeseries
from .report import (
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_UNSATISFIED,
    EXIT_VIOLATION,
    RunReport,
    save_report,
)
from .sampling import sample_initial_data

VARIANTS = ("theorem", "remark")
ORACLE_TOLERANCE = 1e-6
FIT_QUANTITIES = ("X", "V", "Tnorm")


def hypothesis_report(cfg: ScenarioConfig, s0=None, variant: str = "theorem"):
    """Hypothesis report for the sampled ensemble, or ``(None, reason)`` if constants are undefined."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    s0 = s0 if s0 is not None else sample_initial_data(cfg)
    p = cfg.model_params()
    try:
        c = compute_constants(s0, p, cfg.eps, cfg.eps0)
    except ValueError as exc:
        return None, str(exc)
    _, _, Tnorm0 = initial_norms(s0)
    if variant == "remark":
        return check_remark_5_5(c, Tnorm0), ""
    return check_theorem_5_1(c, Tnorm0), ""


def run_check(cfg: ScenarioConfig, variant: str = "theorem") -> RunReport:
    report = RunReport("check", config=cfg)
    h, reason = hypothesis_report(cfg, variant=variant)
    if h is None:
        report.message = f"constants undefined: {reason}"
        report.exit_status = EXIT_UNSATISFIED
        return report
    report.hypothesis = h
    report.settle_exit_status()
    return report


def fit_decay(times, columns: dict, window=None) -> tuple:
    """Fits of X, V, Tnorm; quantities that cannot be fitted are listed in the second item."""
    fits, skipped = [], []
    for q in FIT_QUANTITIES:
        try:
            fits.append(fit_exponential(times, columns[q], window, quantity=q))
        except ValueError as exc:
            skipped.append(f"{q}: {exc}")
    return fits, skipped


def _invariants(traj: Trajectory, cfg: ScenarioConfig, hypotheses_hold: bool, report: RunReport):
    s0 = traj.initial
    cq = conserved_quantities(s0)
    n = s0.n
    space_scale = max(1.0, float(np.max(np.abs(s0.x))), float(np.max(np.abs(s0.v))))
    temp_scale = max(1.0, float(np.max(s0.T)))
    drift = energy_drift(traj)
    com = center_of_mass_deviation(traj, cq)
    mean_res = float(np.max(traj.column("mean_residual")))
    tsum_res = float(np.max(np.abs(traj.column("tsum_residual"))))
    minT = float(np.min(traj.column("minT")))
    maxT = float(np.max(traj.column("maxT")))
    report.metrics.update({
        "drift.energy_relative": drift,
        "drift.center_of_mass": com,
        "drift.mean_fluctuation": mean_res,
        "drift.temperature_sum": tsum_res,
        "corridor.minT": minT,
        "corridor.maxT": maxT,
    })
    failures = report.invariant_failures
    if drift > 1e-8:
        failures.append(f"energy drift {drift:.3e} exceeds 1e-8 (relative)")
    if com > 1e-8:
        failures.append(f"centre of mass deviates from the closed form by {com:.3e} > 1e-8")
    if mean_res > 1e-9 * n * space_scale:
        failures.append(f"fluctuation sums reach {mean_res:.3e} > {1e-9 * n * space_scale:.3e}")
    if tsum_res > 1e-8 * temp_scale:
        failures.append(f"temperature-sum identity off by {tsum_res:.3e} > {1e-8 * temp_scale:.3e}")
    if hypotheses_hold:
        lo, hi = cq.T_m - cfg.eps0, cq.T_M + cfg.eps0
        if minT < lo or maxT > hi:
            failures.append(f"temperatures [{minT:.6g}, {maxT:.6g}] leave the corridor "
                            f"[{lo:.6g}, {hi:.6g}]")


def run_simulate(cfg: ScenarioConfig, out_dir=None, variant: str = "theorem") -> RunReport:
    """Integrate, check envelopes and invariants, and write ``timeseries.csv`` and ``report.txt``."""
    report = RunReport("simulate", config=cfg)
    s0 = sample_initial_data(cfg)
    p = cfg.model_params()
    h, reason = hypothesis_report(cfg, s0, variant)
    report.hypothesis = h
    if h is None:
        report.message = f"constants undefined: {reason}"
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    try:
        traj = integrate(s0, p, cfg.integrator_config(), observer=Recorder(s0, eps=cfg.eps))
    except NumericalFailure as exc:
        report.message = f"numerical failure: {exc}"
        report.exit_status = EXIT_NUMERICAL
        if out is not None:
            save_report(report, out / "report.txt")
        return report
    if out is not None:
        write_timeseries(traj, out / "timeseries.csv")

    hold = h is not None and h.overall
    if h is not None:
        report.decay = verify_decay_bounds(traj, h.constants, h)
        report.guaranteed = guaranteed_rates(h.constants)
    if hold:
        report.dissipation = dissipative_inequality_check(traj, p, cfg.eps, cfg.eps0)
    _invariants(traj, cfg, hold, report)
    columns = {q: traj.column(q) for q in FIT_QUANTITIES}
    report.fits, skipped = fit_decay(traj.times, columns)
    if skipped:
        report.message = "; ".join(filter(None, [report.message, "fits skipped: " + ", ".join(skipped)]))
    if h is None:
        report.exit_status = EXIT_UNSATISFIED
        if report.invariant_failures:
            report.exit_status = EXIT_VIOLATION
    else:
        report.settle_exit_status()
    if out is not None:
        save_report(report, out / "report.txt")
    return report


def run_oracle(cfg: ScenarioConfig, t_end: float = 10.0) -> RunReport:
    """Compare the full simulation against direct integration of the fluctuation system."""
    cfg = cfg.replace(t_end=t_end)
    report = RunReport("oracle", config=cfg)
    s0 = sample_initial_data(cfg)
    p = cfg.model_params()
    icfg = cfg.integrator_config()
    try:
        traj = integrate(s0, p, icfg, observer=Recorder(s0, eps=cfg.eps))
        run = integrate_fluctuations(s0, p, icfg)
    except NumericalFailure as exc:
        report.message = f"numerical failure: {exc}"
        report.exit_status = EXIT_NUMERICAL
        return report
    cmp = compare_with_oracle(traj, run)
    report.metrics.update({
        "oracle.max_dX": cmp.max_dX,
        "oracle.max_dV": cmp.max_dV,
        "oracle.max_dTnorm": cmp.max_dTnorm,
        "oracle.max_deviation": cmp.max_deviation,
    })
    if cmp.max_deviation > ORACLE_TOLERANCE:
        report.invariant_failures.append(
            f"fluctuation oracle deviates by {cmp.max_deviation:.3e} > {ORACLE_TOLERANCE:g}")
        report.exit_status = EXIT_VIOLATION
    else:
        report.exit_status = EXIT_OK
    return report


def run_fit(path, window=None) -> RunReport:
    report = RunReport("fit")
    data = read_timeseries(path)
    report.fits, skipped = fit_decay(data["t"], data, window)
    report.message = f"source: {path}"
    if skipped:
        report.message += "; fits skipped: " + ", ".join(skipped)
    return report


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepCell:
    index: int
    kappa1: float
    kappa2: float
    eps0: float
    exit_status: int
    directory: str


def worker_count() -> int:
    env = os.environ.get("TCS_WORKERS")
    if env:
        value = int(env)
        if value < 1:
            raise ValueError(f"TCS_WORKERS must be positive, got {value}")
        return value
    return os.cpu_count() or 1


def _run_cell(args) -> SweepCell:
    index, cfg, directory, variant = args
    r = run_simulate(cfg, directory, variant)
    return SweepCell(index, cfg.kappa1, cfg.kappa2, cfg.eps0, r.exit_status, str(directory))


def run_sweep(cfg: ScenarioConfig, kappa1s, kappa2s, eps0s, out_dir, variant: str = "theorem",
              workers: int | None = None) -> list:
    """Run :func:`run_simulate` on every ``(kappa1, kappa2, eps0)`` cell.

    Cells are independent, so the result (list order and file contents) does
    not depend on ``workers``.  A ``summary.csv`` lists the cells in grid order.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = []
    for i, (k1, k2, e0) in enumerate(itertools.product(kappa1s, kappa2s, eps0s)):
        cell_cfg = cfg.replace(kappa1=float(k1), kappa2=float(k2), eps0=float(e0))
        jobs.append((i, cell_cfg, out / f"cell_{i:03d}", variant))
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(jobs) <= 1:
        cells = [_run_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            cells = list(pool.map(_run_cell, jobs))
    cells.sort(key=lambda c: c.index)
    lines = ["cell,kappa1,kappa2,eps0,exit_status"]
    lines += [f"{c.index},{c.kappa1!r},{c.kappa2!r},{c.eps0!r},{c.exit_status}" for c in cells]
    (out / "summary.csv").write_text("\n".join(lines) + "\n")
    return cells


def sweep_exit_status(cells) -> int:
    statuses = {c.exit_status for c in cells}
    for code in (EXIT_NUMERICAL, EXIT_VIOLATION, EXIT_UNSATISFIED):
        if code in statuses:
            return code
    return EXIT_OK
