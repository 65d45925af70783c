"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``criterion N: PASS/FAIL`` line; the lines are repeated in
the terminal summary.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import admissible_configs, record_criterion, unit_params
from tcsflock.analysis import (
    compute_constants,
    fit_exponential,
    gronwall_bound,
    guaranteed_rates,
    initial_norms,
    mechanical_envelope,
    temperature_envelope,
)
from tcsflock.diagnostics import (
    FluctuationState,
    compare_with_oracle,
    dissipative_inequality_check,
    integrate_fluctuations,
    lyapunov,
    lyapunov_bounds,
    norms,
)
from tcsflock.harness.cli import main
from tcsflock.harness.io import read_timeseries
from tcsflock.harness.report import parse_trailer
from tcsflock.harness.sampling import sample_initial_data
from tcsflock.integrator import IntegratorConfig, integrate
from tcsflock.model import ParticleEnsemble, conserved_quantities

REF_T_m, REF_T_M = 10.6445, 10.8955


def _sig3(value, target):
    return abs(value - target) / abs(target) < 5e-3


def test_criterion_1_hypothesis_reproduction():
    start = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "tcsflock", "check", "--preset", "paper-sec6"],
                          capture_output=True, text=True)
    elapsed = time.perf_counter() - start
    kv = parse_trailer(proc.stdout)
    slacks = {k: float(v) for k, v in kv.items() if k.startswith("slack.")}
    T_m, T_M = float(kv["const.T_m"]), float(kv["const.T_M"])
    lam, gamma, eps, eps0 = (float(kv[f"const.{k}"]) for k in ("lam", "gamma", "eps", "eps0"))
    delta = float(kv["const.delta_star"])
    phi_far = float(kv["const.phi_far"])
    first = (eps + eps * gamma) / lam
    second = 2 * (T_M + eps0) / ((delta - 1) * (T_m - eps0))
    ok = (proc.returncode == 0 and kv["hypotheses_satisfied"] == "1"
          and len(slacks) == 6 and all(s > 0 for s in slacks.values())
          and abs(T_m - REF_T_m) <= 0.05 and abs(T_M - REF_T_M) <= 0.05
          and _sig3(phi_far, 0.296) and _sig3(first, 0.142) and _sig3(second, 0.181)
          and phi_far > max(first, second) and elapsed < 1.0)
    record_criterion(1, ok, f"exit={proc.returncode} T_m={T_m:.4f} T_M={T_M:.4f} "
                            f"phi(3sqrt2 eps0)={phi_far:.4f} > max{{{first:.4f}, {second:.4f}}} "
                            f"runtime={elapsed:.2f}s")
    assert ok, proc.stdout + proc.stderr


def test_criterion_2_statistical_initial_data(preset_cfg):
    X0, T0 = [], []
    for seed in range(100):
        X, _, Tn = initial_norms(sample_initial_data(preset_cfg.replace(seed=seed)))
        X0.append(X)
        T0.append(Tn)
    mx, mt = float(np.mean(X0)), float(np.mean(T0))
    # closed-form moments: E X^2 = (n-1)(w1^2+w2^2)/12; Tnorm is dominated by the T spread
    expected_X = math.sqrt(99 * (0.03 ** 2 + 0.04 ** 2) / 12)
    ok = abs(mx / expected_X - 1) <= 0.1 and abs(mx / 0.144 - 1) <= 0.1 and abs(mt / 0.29 - 1) <= 0.1
    record_criterion(2, ok, f"mean X(0)={mx:.4f} (target 0.144, closed form {expected_X:.4f}), "
                            f"mean Tnorm(0)={mt:.4f} (target 0.29)")
    assert ok


@pytest.fixture(scope="module")
def cli_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("preset")
    start = time.perf_counter()
    code = main(["simulate", "--preset", "paper-sec6", "--t-end", "50", "--out", str(out)])
    elapsed = time.perf_counter() - start
    return code, elapsed, out


def test_criterion_3_decay_envelopes(cli_run, preset_state, preset_params):
    code, elapsed, out = cli_run
    kv = parse_trailer((out / "report.txt").read_text())
    data = read_timeseries(out / "timeseries.csv")
    # independent re-evaluation of both envelopes from the written file
    c = compute_constants(preset_state, preset_params, 0.003, 0.76)
    t = data["t"]
    mech = mechanical_envelope(c, data["X"][0] ** 2 + data["V"][0] ** 2, t)
    temp = temperature_envelope(c, data["Tnorm"][0] ** 2, t)
    z = data["X"] ** 2 + data["V"] ** 2
    bad_mech = int(np.sum(z > mech * (1 + 1e-9) + 1e-12))
    bad_temp = int(np.sum(data["Tnorm"] ** 2 > temp * (1 + 1e-9) + 1e-12))
    ok = (code == 0 and len(t) == 5001 and kv["decay.status"] == "verified"
          and kv["decay.violations"] == "0" and bad_mech == 0 and bad_temp == 0 and elapsed < 30.0)
    record_criterion(3, ok, f"exit={code} records={len(t) - 1} steps, violations mech={bad_mech} "
                            f"temp={bad_temp}, runtime={elapsed:.1f}s")
    assert ok


def test_criterion_4_flocking_rates(preset_trajectory, preset_state, preset_params):
    c = compute_constants(preset_state, preset_params, 0.003, 0.76)
    guaranteed = guaranteed_rates(c)
    parts, ok = [], True
    for q in ("X", "V", "Tnorm"):
        fit = fit_exponential(preset_trajectory.times, preset_trajectory.column(q), quantity=q)
        ok &= fit.rate > 0 and fit.rate >= guaranteed[q]
        parts.append(f"{q}: rate={fit.rate:.4f} >= {guaranteed[q]:.4f} (r^2={fit.r_squared:.3f})")
    record_criterion(4, ok, "; ".join(parts))
    assert ok


def test_criterion_5_conservation(preset_trajectory):
    traj = preset_trajectory
    s0 = traj.initial
    cq = conserved_quantities(s0)
    E = traj.column("energy")
    drift = float(np.max(np.abs(E - E[0])) / abs(E[0]))
    com = 0.0
    for t, r in zip(traj.times, traj.records):
        xe, ve = cq.center_of_mass_at(float(t))
        com = max(com, float(np.max(np.abs(np.subtract(r.x_c, xe)))), float(np.max(np.abs(np.subtract(r.v_c, ve)))))
    scale = max(1.0, float(np.max(np.abs(s0.x))), float(np.max(np.abs(s0.v))))
    mean_res = float(np.max(traj.column("mean_residual")))
    T_scale = float(np.max(s0.T))
    tsum = float(np.max(np.abs(traj.column("tsum_residual"))))
    ok = (len(traj.times) == 5001 and drift <= 1e-8 and com <= 1e-8
          and mean_res <= 1e-9 * s0.n * scale and tsum <= 1e-8 * T_scale)
    record_criterion(5, ok, f"energy drift={drift:.2e}, centre of mass={com:.2e}, "
                            f"mean fluctuation={mean_res:.2e}, temperature-sum identity={tsum:.2e}")
    assert ok


def test_criterion_6_oracle_equivalence(preset_cfg):
    cases = [("paper-sec6", preset_cfg.replace(t_end=10.0))]
    cases += [(f"random-{k}", cfg) for k, cfg in enumerate(admissible_configs(10, n=20, seed=6, t_end=10.0))]
    worst, ok = 0.0, True
    for name, cfg in cases:
        s0 = sample_initial_data(cfg)
        p = cfg.model_params()
        icfg = cfg.integrator_config()
        dev = compare_with_oracle(integrate(s0, p, icfg), integrate_fluctuations(s0, p, icfg))
        worst = max(worst, dev.max_deviation)
        ok &= dev.max_deviation <= 1e-6
    record_criterion(6, ok, f"{len(cases)} configurations over [0, 10], max deviation in X, V, Tnorm = {worst:.2e}")
    assert ok


def test_criterion_7_integrator_order():
    s0 = ParticleEnsemble([[1.0, 0.0]], [[0.0, 0.5]], [1.0])
    p = unit_params()
    errs = []
    for dt in (0.1, 0.05, 0.025):
        end = integrate(s0, p, IntegratorConfig(dt=dt, t_end=2.0), keep_states=True).states[-1]
        ex = np.array([math.cos(2.0), 0.5 * math.sin(2.0)])
        ev = np.array([-math.sin(2.0), 0.5 * math.cos(2.0)])
        errs.append(float(np.sqrt(np.sum((end.x[0] - ex) ** 2) + np.sum((end.v[0] - ev) ** 2))))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    ok = all(14 <= r <= 18 for r in ratios)
    record_criterion(7, ok, f"error ratios {ratios[0]:.3f}, {ratios[1]:.3f}")
    assert ok


def _fine_solution(y0, c1, c2, c3, times, h=1e-3):
    f = lambda t, y: -c1 * y + c2 * math.exp(-c3 * t)
    out, t, y = [], 0.0, y0
    for target in times:
        steps = int(round((target - t) / h))
        for _ in range(steps):
            k1 = f(t, y)
            k2 = f(t + h / 2, y + h / 2 * k1)
            k3 = f(t + h / 2, y + h / 2 * k2)
            k4 = f(t + h, y + h * k3)
            y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        out.append(y)
    return np.array(out)


def test_criterion_8_gronwall_cross_check():
    times = [0.5, 1.0, 2.0, 4.0]
    worst = 0.0
    for c1 in (0.5, 1.5, 3.0):
        for c2 in (0.1, 1.0, 5.0):
            for c3 in (0.2, 1.0, 2.5):
                ref = _fine_solution(1.0, c1, c2, c3, times)
                got = gronwall_bound(1.0, c1, c2, c3, np.array(times))
                worst = max(worst, float(np.max(np.abs(got - ref) / np.abs(ref))))
    ok = worst <= 1e-8
    record_criterion(8, ok, f"27 parameter triples, max relative difference {worst:.2e}")
    assert ok


def test_criterion_9_property_suite(preset_trajectory, preset_cfg):
    traj = preset_trajectory
    p = preset_cfg.model_params()
    check = dissipative_inequality_check(traj, p, preset_cfg.eps, preset_cfg.eps0)
    cq = conserved_quantities(traj.initial)
    lo, hi = cq.T_m - preset_cfg.eps0, cq.T_M + preset_cfg.eps0
    minT, maxT = traj.column("minT"), traj.column("maxT")
    corridor = bool(np.all(minT >= lo) and np.all(maxT <= hi))
    rng = np.random.default_rng(2718)
    lyap_ok = True
    for _ in range(1000):
        n, d = int(rng.integers(1, 30)), int(rng.integers(1, 4))
        f = FluctuationState(rng.normal(size=(n, d)), rng.normal(size=(n, d)), np.zeros(n))
        X, V, _ = norms(f)
        a, b = lyapunov_bounds(X, V)
        L = lyapunov(f, rng.uniform(1e-9, 0.5))
        lyap_ok &= a <= L * (1 + 1e-12) and L <= b * (1 + 1e-12)
    ok = check.status == "checked" and not check.violations and check.checked > 0 and corridor and lyap_ok
    record_criterion(9, ok, f"dissipative check: {check.checked} samples, {len(check.violations)} violations, "
                            f"{len(check.out_of_range)} out of range; corridor [{lo:.4f}, {hi:.4f}] "
                            f"holds={corridor}; Lyapunov bounds on 1000 states={lyap_ok}")
    assert ok
