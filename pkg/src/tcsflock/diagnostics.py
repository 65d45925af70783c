"""Fluctuation functionals, invariant residuals, and the fluctuation-system oracle.

The oracle integrates the fluctuations ``(xhat, vhat, That)`` directly, with
the centre of mass carried by its exact harmonic-oscillator formula, so it
shares no state with the full simulation beyond the initial data.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalBlowUp, NumericalFailure, TemperatureCollapse
from .integrator import IntegratorConfig, Trajectory, rk4_arrays
from .model import (
    ConservedQuantities,
    ModelParams,
    ParticleEnsemble,
    asymptotic_temperature,
    center_of_mass,
    conserved_quantities,
    total_energy,
)


class LyapunovWeightWarning(UserWarning):
    """Cross-term weight outside (0, 1/2]; the equivalence bounds do not apply."""


@dataclass(frozen=True, eq=False)
class FluctuationState:
    xhat: np.ndarray
    vhat: np.ndarray
    That: np.ndarray


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    X: float
    V: float
    Tnorm: float
    energy: float
    x_c: tuple
    v_c: tuple
    T_inf: float
    lyapunov: float
    minT: float
    maxT: float
    # sum_a xhat_a . vhat_a, so L can be re-evaluated for any weight
    cross: float = 0.0
    # max |sum_a xhat_a|, |sum_a vhat_a| over components
    mean_residual: float = 0.0
    # sum_a (T_a - T_inf) + V^2 / 2, zero by energy conservation
    tsum_residual: float = 0.0

    @property
    def max_abs_That(self) -> float:
        return max(self.maxT - self.T_inf, self.T_inf - self.minT)


def fluctuations(s: ParticleEnsemble, T_inf: float) -> FluctuationState:
    x_c, v_c, _ = center_of_mass(s)
    return FluctuationState(s.x - x_c, s.v - v_c, s.T - T_inf)


def norms(f: FluctuationState):
    """``(X, V, Tnorm)``: l2 norms of the three fluctuation arrays."""
    return (math.sqrt(float(np.sum(f.xhat * f.xhat))),
            math.sqrt(float(np.sum(f.vhat * f.vhat))),
            math.sqrt(float(np.sum(f.That * f.That))))


def lyapunov(f: FluctuationState, eps: float) -> float:
    if not 0 < eps <= 0.5:
        warnings.warn(f"eps={eps} outside (0, 1/2]; equivalence bounds do not hold",
                      LyapunovWeightWarning, stacklevel=2)
    return float(0.5 * np.sum(f.xhat * f.xhat) + 0.5 * np.sum(f.vhat * f.vhat)
                 + eps * np.sum(f.xhat * f.vhat))


def lyapunov_bounds(X: float, V: float):
    """Equivalence bounds ``(3/16 (X^2+V^2), 3/4 (X^2+V^2))`` valid for eps <= 1/2."""
    z = X * X + V * V
    return 3.0 / 16.0 * z, 0.75 * z


class Recorder:
    """Observer producing a :class:`DiagnosticsRecord` per recorded sample."""

    def __init__(self, s0: ParticleEnsemble, eps: float = 0.003):
        self.cq = conserved_quantities(s0)
        self.eps = eps

    def __call__(self, t: float, s: ParticleEnsemble) -> DiagnosticsRecord:
        x_c, v_c, _ = center_of_mass(s)
        T_inf = asymptotic_temperature(self.cq, v_c)
        f = fluctuations(s, T_inf)
        X, V, Tn = norms(f)
        cross = float(np.sum(f.xhat * f.vhat))
        return DiagnosticsRecord(
            t=float(t), X=X, V=V, Tnorm=Tn,
            energy=total_energy(s),
            x_c=tuple(float(c) for c in x_c),
            v_c=tuple(float(c) for c in v_c),
            T_inf=T_inf,
            lyapunov=0.5 * X * X + 0.5 * V * V + self.eps * cross,
            minT=float(s.T.min()), maxT=float(s.T.max()),
            cross=cross,
            mean_residual=float(max(np.max(np.abs(f.xhat.sum(axis=0))),
                                    np.max(np.abs(f.vhat.sum(axis=0))))),
            tsum_residual=float(np.sum(f.That) + 0.5 * V * V),
        )


# ---------------------------------------------------------------------------
# dissipative inequality along a recorded trajectory


@dataclass(frozen=True)
class DissipationViolation:
    t: float
    dL_dt: float
    bound: float
    tol: float

    @property
    def excess(self) -> float:
        return self.dL_dt - self.bound - self.tol


@dataclass
class DissipationCheck:
    violations: list = field(default_factory=list)
    # times skipped because the a priori condition max|That| <= eps0 failed there
    out_of_range: list = field(default_factory=list)
    status: str = "checked"
    checked: int = 0


def dissipation_bound(p: ModelParams, eps: float, eps0: float, T_m: float, T_M: float,
                      X, V):
    """Right-hand side of the dissipative inequality at fluctuation norms ``X, V``."""
    lam = p.kappa1 / (2.0 * (T_M + eps0))
    gam = 3.0 * (p.kappa1 * p.phi(0.0)) ** 2 / (T_m - eps0) ** 2 + 1.0
    X = np.asarray(X, dtype=float)
    V = np.asarray(V, dtype=float)
    coeff = (-2.0 * lam * p.phi(math.sqrt(2.0) * X) + eps * gam
             + p.kappa1 * eps0 * p.phi(0.0) / (T_m - eps0) ** 2)
    return coeff * V * V - 0.5 * eps * X * X


def dissipative_inequality_check(traj: Trajectory, p: ModelParams, eps: float,
                                 eps0: float) -> DissipationCheck:
    """Compare a centred-difference estimate of dL/dt with the dissipative bound.

    The tolerance at each interior sample is ``10 h^2 M3`` with ``M3`` the
    largest third-difference estimate of ``|L'''|`` in a five-sample
    neighbourhood, plus a rounding floor.
    """
    cq = conserved_quantities(traj.initial)
    T_m, T_M = cq.T_m, cq.T_M
    result = DissipationCheck()
    if not (eps0 > 0 and T_m > eps0 and T_m / eps0 > 3.0):
        result.status = "hypothesis-out-of-range"
        result.out_of_range = [float(t) for t in traj.times]
        return result
    t = np.asarray(traj.times, dtype=float)
    if len(t) < 5:
        raise ValueError("need at least 5 samples to estimate dL/dt")
    h = np.diff(t)
    # final truncated step breaks uniformity; only use the uniform prefix
    m = len(t)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        m = int(np.argmax(~np.isclose(h, h[0], rtol=1e-9, atol=0))) + 1
    h = h[0]
    X = traj.column("X")[:m]
    V = traj.column("V")[:m]
    L = 0.5 * X * X + 0.5 * V * V + eps * traj.column("cross")[:m]
    dL = (L[2:] - L[:-2]) / (2.0 * h)
    d3 = np.abs(L[3:] - 3.0 * L[2:-1] + 3.0 * L[1:-2] - L[:-3]) / h ** 3
    # d3[j] spans samples j..j+3; interior sample k uses d3[k-3 .. k]
    d3_pad = np.concatenate([[d3[0]] * 3, d3, [d3[-1]] * 3])
    M3 = np.max(np.stack([d3_pad[i:i + len(dL)] for i in range(1, 6)]), axis=0)
    tol = 10.0 * h * h * M3 + 1e-13 * np.max(np.abs(L)) / h
    bound = dissipation_bound(p, eps, eps0, T_m, T_M, X[1:-1], V[1:-1])
    that = np.array([r.max_abs_That for r in traj.records[:m]])
    for j, k in enumerate(range(1, m - 1)):
        if max(that[k - 1], that[k], that[k + 1]) > eps0:
            result.out_of_range.append(float(t[k]))
            continue
        result.checked += 1
        if dL[j] > bound[j] + tol[j]:
            result.violations.append(
                DissipationViolation(float(t[k]), float(dL[j]), float(bound[j]), float(tol[j])))
    return result


# ---------------------------------------------------------------------------
# fluctuation system oracle


def fluctuation_rhs_arrays(xhat, vhat, That, x_c, v_c, T_inf, p: ModelParams):
    T = That + T_inf
    if not np.all(T > 0):
        raise TemperatureCollapse("nonpositive temperature in fluctuation system")
    # written independently of model.coupling_terms: this is the cross-check
    n = That.shape[0]
    diff = xhat[:, None, :] - xhat[None, :, :]
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    w = vhat / T[:, None]
    align = (p.kappa1 / n) * np.sum(p.phi(r)[:, :, None] * (w[None, :, :] - w[:, None, :]), axis=1)
    heat = (p.kappa2 / n) * np.sum(p.zeta(r) * (1.0 / T[:, None] - 1.0 / T[None, :]), axis=1)
    dvhat = align - xhat
    # d/dt (That + |vhat|^2/2) = heat + x_c . vhat + v_c . xhat
    dThat = heat + np.sum(vhat * x_c, axis=1) + np.sum(xhat * v_c, axis=1) - np.sum(vhat * dvhat, axis=1)
    return vhat.copy(), dvhat, dThat


def fluctuation_rhs(f: FluctuationState, aux, p: ModelParams) -> FluctuationState:
    """Derivative of the fluctuation state; ``aux = (x_c, v_c, T_inf)``."""
    x_c, v_c, T_inf = aux
    d = fluctuation_rhs_arrays(f.xhat, f.vhat, f.That, np.asarray(x_c, float),
                               np.asarray(v_c, float), float(T_inf), p)
    return FluctuationState(*d)


@dataclass
class FluctuationRun:
    times: np.ndarray
    X: np.ndarray
    V: np.ndarray
    Tnorm: np.ndarray


def integrate_fluctuations(s0: ParticleEnsemble, p: ModelParams,
                           cfg: IntegratorConfig) -> FluctuationRun:
    """RK4 on the fluctuation system with the exact centre-of-mass motion."""
    cq = conserved_quantities(s0)

    def aux(t):
        x_c, v_c = cq.center_of_mass_at(t)
        return x_c, v_c, asymptotic_temperature(cq, v_c)

    def f(t, y):
        return fluctuation_rhs_arrays(*y, *aux(t), p)

    x_c0, v_c0, _ = center_of_mass(s0)
    f0 = fluctuations(s0, aux(0.0)[2])
    y = (np.array(f0.xhat), np.array(f0.vhat), np.array(f0.That))
    grid = cfg.step_times()
    out = [norms(f0)]
    times = [0.0]
    for k in range(1, len(grid)):
        t0, t1 = grid[k - 1], grid[k]
        try:
            y = rk4_arrays(f, t0, y, t1 - t0)
            if not all(np.all(np.isfinite(a)) for a in y):
                raise NumericalBlowUp("numerical blow-up in fluctuation system")
        except NumericalFailure as exc:
            exc.t = float(t0)
            raise
        if k % cfg.record_stride == 0 or k == len(grid) - 1:
            times.append(float(t1))
            out.append(norms(FluctuationState(*y)))
    arr = np.array(out)
    return FluctuationRun(np.array(times), arr[:, 0], arr[:, 1], arr[:, 2])


@dataclass(frozen=True)
class OracleComparison:
    max_dX: float
    max_dV: float
    max_dTnorm: float

    @property
    def max_deviation(self) -> float:
        return max(self.max_dX, self.max_dV, self.max_dTnorm)


def compare_with_oracle(traj: Trajectory, run: FluctuationRun) -> OracleComparison:
    if len(traj.times) != len(run.times) or not np.allclose(traj.times, run.times, rtol=0, atol=1e-12):
        raise ValueError("trajectory and oracle run use different time grids")
    return OracleComparison(
        float(np.max(np.abs(traj.column("X") - run.X))),
        float(np.max(np.abs(traj.column("V") - run.V))),
        float(np.max(np.abs(traj.column("Tnorm") - run.Tnorm))),
    )


def center_of_mass_deviation(traj: Trajectory, cq: ConservedQuantities | None = None) -> float:
    """Max over records of |x_c(t) - closed form| and |v_c(t) - closed form|."""
    cq = cq or conserved_quantities(traj.initial)
    worst = 0.0
    for t, r in zip(traj.times, traj.records):
        xe, ve = cq.center_of_mass_at(float(t))
        worst = max(worst, float(np.max(np.abs(np.asarray(r.x_c) - xe))),
                    float(np.max(np.abs(np.asarray(r.v_c) - ve))))
    return worst


def energy_drift(traj: Trajectory) -> float:
    e = traj.column("energy")
    return float(np.max(np.abs(e - e[0])) / abs(e[0]))
