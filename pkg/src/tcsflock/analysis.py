"""Flocking constants, sufficient-condition reports, decay envelopes and fits.

Constants follow the flocking estimate for TCS particles in a harmonic well:

    lambda = k1 / (2 (T_M + eps0))
    gamma  = 3 (k1 phi(0))^2 / (T_m - eps0)^2 + 1
    A1 = 2 k2 zeta(3 sqrt2 eps0) / (T_M + eps0)^2 - k1 phi(0) / (T_m - eps0) - 1
         - 16 k1 phi(0) |Z0|^2 / (T_m - eps0)^2 - 2 sqrt2 |z_c0|
    A2 = 16 (2 phi(0) k1 / (T_m - eps0) + k2 zeta(3 sqrt2 eps0) / (2 n (T_M + eps0)^2) + 1) |Z0|^4
         + 4 sqrt2 |z_c0| |Z0|^2

where ``|Z0|^2 = X(0)^2 + V(0)^2`` and ``|z_c0|^2 = |x_c(0)|^2 + |v_c(0)|^2``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import fluctuations, norms
from .integrator import Trajectory
from .model import (
    ModelParams,
    ParticleEnsemble,
    asymptotic_temperature,
    conserved_quantities,
)

SQRT2 = math.sqrt(2.0)


class DegenerateCaseWarning(UserWarning):
    """Gronwall bound evaluated at c1 == c3, outside the stated range c1 != c3."""


@dataclass(frozen=True)
class TheoremConstants:
    T_m: float
    T_M: float
    eps0: float
    eps: float
    delta_star: float
    lam: float
    gamma: float
    A1: float
    A2: float
    Z0_sq: float
    zc0_norm: float
    # inputs the condition checks need besides the constants above
    X0: float = 0.0
    V0: float = 0.0
    n: int = 1
    kappa1: float = 0.0
    phi0: float = 1.0
    phi_far: float = 1.0  # phi(3 sqrt2 eps0)


def constants_from_values(*, T_m, T_M, X0, V0, zc0_norm, n, p: ModelParams,
                          eps, eps0) -> TheoremConstants:
    """Constants from already-reduced initial data (used for quoted reference values)."""
    if not eps0 > 0 or not eps > 0:
        raise ValueError("eps and eps0 must be positive")
    if not T_m > eps0:
        raise ValueError(f"T_m = {T_m:.6g} must exceed eps0 = {eps0:.6g}")
    k1, k2 = p.kappa1, p.kappa2
    phi0 = p.phi(0.0)
    phi_far = p.phi(3.0 * SQRT2 * eps0)
    zeta_far = p.zeta(3.0 * SQRT2 * eps0)
    lo, hi = T_m - eps0, T_M + eps0
    Z0_sq = X0 * X0 + V0 * V0
    A1 = (2.0 * k2 * zeta_far / hi ** 2 - k1 * phi0 / lo - 1.0
          - 16.0 * k1 * phi0 * Z0_sq / lo ** 2 - 2.0 * SQRT2 * zc0_norm)
    A2 = (16.0 * (2.0 * phi0 * k1 / lo + k2 * zeta_far / (2.0 * n * hi ** 2) + 1.0) * Z0_sq ** 2
          + 4.0 * SQRT2 * zc0_norm * Z0_sq)
    return TheoremConstants(
        T_m=T_m, T_M=T_M, eps0=eps0, eps=eps, delta_star=T_m / eps0,
        lam=k1 / (2.0 * hi),
        gamma=3.0 * (k1 * phi0) ** 2 / lo ** 2 + 1.0,
        A1=A1, A2=A2, Z0_sq=Z0_sq, zc0_norm=zc0_norm,
        X0=X0, V0=V0, n=n, kappa1=k1, phi0=phi0, phi_far=phi_far,
    )


def initial_norms(s0: ParticleEnsemble):
    """``(X(0), V(0), Tnorm(0))`` of an ensemble."""
    cq = conserved_quantities(s0)
    return norms(fluctuations(s0, asymptotic_temperature(cq, cq.v_c0)))


def compute_constants(s0: ParticleEnsemble, p: ModelParams, eps: float,
                      eps0: float) -> TheoremConstants:
    cq = conserved_quantities(s0)
    X0, V0, _ = initial_norms(s0)
    return constants_from_values(T_m=cq.T_m, T_M=cq.T_M, X0=X0, V0=V0,
                                 zc0_norm=cq.zc0_norm, n=s0.n, p=p, eps=eps, eps0=eps0)


# ---------------------------------------------------------------------------
# sufficient conditions


@dataclass(frozen=True)
class Condition:
    name: str
    satisfied: bool
    lhs: float
    rhs: float
    slack: float
    detail: str = ""


@dataclass
class HypothesisReport:
    constants: TheoremConstants
    conditions: list
    variant: str

    @property
    def overall(self) -> bool:
        return all(c.satisfied for c in self.conditions)

    def condition(self, name: str) -> Condition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)


def _le(name, lhs, rhs, detail=""):
    return Condition(name, bool(lhs <= rhs), float(lhs), float(rhs), float(rhs - lhs), detail)


def _gt(name, lhs, rhs, detail=""):
    return Condition(name, bool(lhs > rhs), float(lhs), float(rhs), float(lhs - rhs), detail)


def _temperature_budget(c: TheoremConstants, Tnorm0: float, name: str) -> Condition:
    # eps0^2 > Tnorm(0)^2 + A2 / |A1 - 2 eps / 3|, meaningful only for A1 > 0
    gap = abs(c.A1 - 2.0 * c.eps / 3.0)
    rhs = Tnorm0 ** 2 + (c.A2 / gap if gap > 0 else math.inf)
    cond = _gt(name, c.eps0 ** 2, rhs)
    if not c.A1 > 0:
        return Condition(cond.name, False, cond.lhs, cond.rhs, cond.slack,
                         f"A1 = {c.A1:.6g} <= 0: condition unsatisfiable")
    return cond


def condition_e_terms(c: TheoremConstants):
    """The two competitors of ``phi(3 sqrt2 eps0)`` in the kernel condition."""
    first = (c.eps + c.eps * c.gamma) / c.lam if c.lam > 0 else math.inf
    second = (2.0 * (c.T_M + c.eps0) * c.phi0 / ((c.delta_star - 1.0) * (c.T_m - c.eps0))
              if c.delta_star > 1.0 else math.inf)
    return first, second


def check_theorem_5_1(c: TheoremConstants, Tnorm0: float) -> HypothesisReport:
    """Evaluate the global flocking conditions (a)-(e) with numeric slack."""
    conds = [
        _gt("a:delta_star", c.delta_star, 3.0, "delta* = T_m/eps0"),
        _le("b:X0", c.X0, c.eps0),
        _le("b:V0", c.V0, c.eps0),
        _temperature_budget(c, Tnorm0, "c:temperature_budget"),
    ]
    d_ok = 0.0 < c.eps <= 0.5 and c.eps != 1.5 * c.A1
    conds.append(Condition("d:eps_range", bool(d_ok), c.eps, 0.5, 0.5 - c.eps,
                           "0 < eps <= 1/2 and eps != 3/2 A1"))
    first, second = condition_e_terms(c)
    conds.append(_gt("e:phi_far", c.phi_far, max(first, second),
                     f"max{{{first:.6g}, {second:.6g}}}"))
    return HypothesisReport(c, conds, "theorem_5_1")


def remark_lhs(c: TheoremConstants) -> float:
    """``-2 lambda phi(3 sqrt2 eps0) + eps gamma + k1 eps0 phi(0) / (T_m - eps0)^2``."""
    return (-2.0 * c.lam * c.phi_far + c.eps * c.gamma
            + c.kappa1 * c.eps0 * c.phi0 / (c.T_m - c.eps0) ** 2)


def check_remark_5_5(c: TheoremConstants, Tnorm0: float) -> HypothesisReport:
    """Relaxed conditions (2') and (3')."""
    conds = [
        _le("2':X0", c.X0, c.eps0),
        _le("2':V0", c.V0, c.eps0),
        _temperature_budget(c, Tnorm0, "2':temperature_budget"),
        _le("3':dissipation", remark_lhs(c), -c.eps),
    ]
    return HypothesisReport(c, conds, "remark_5_5")


# ---------------------------------------------------------------------------
# envelopes


def gronwall_bound(y0, c1, c2, c3, t):
    """``y0 e^{-c1 t} + c2/(c1-c3) (e^{-c3 t} - e^{-c1 t})``.

    At ``c1 == c3`` the limit ``(y0 + c2 t) e^{-c1 t}`` is returned and a
    :class:`DegenerateCaseWarning` is issued.
    """
    t = np.asarray(t, dtype=float)
    if c1 == c3:
        warnings.warn("c1 == c3: degenerate case (outside the stated range c1 != c3)",
                      DegenerateCaseWarning, stacklevel=2)
        out = (y0 + c2 * t) * np.exp(-c1 * t)
    else:
        out = y0 * np.exp(-c1 * t) + c2 / (c1 - c3) * (np.exp(-c3 * t) - np.exp(-c1 * t))
    return float(out) if out.ndim == 0 else out


def mechanical_envelope(c: TheoremConstants, Z0_sq: float, t):
    out = 4.0 * Z0_sq * np.exp(-2.0 * c.eps * np.asarray(t, dtype=float) / 3.0)
    return float(out) if out.ndim == 0 else out


def temperature_envelope(c: TheoremConstants, Tnorm0_sq: float, t):
    rate = 2.0 * c.eps / 3.0
    if c.A1 == rate:
        raise ValueError("A1 == 2 eps / 3 is excluded by eps != 3/2 A1")
    t = np.asarray(t, dtype=float)
    out = (Tnorm0_sq * np.exp(-c.A1 * t)
           + c.A2 / (c.A1 - rate) * (np.exp(-rate * t) - np.exp(-c.A1 * t)))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class EnvelopeViolation:
    t: float
    quantity: str
    measured: float
    envelope: float


@dataclass
class DecayVerification:
    status: str  # "verified", "violated" or "hypotheses not established"
    violations: list = field(default_factory=list)

    @property
    def refused(self) -> bool:
        return self.status == "hypotheses not established"


def verify_decay_bounds(traj: Trajectory, c: TheoremConstants,
                        report: HypothesisReport | None = None) -> DecayVerification:
    """Check both proved envelopes at every record.

    Refuses (status ``"hypotheses not established"``) when ``report`` is
    given and not satisfied.
    """
    if report is not None and not report.overall:
        return DecayVerification("hypotheses not established")
    t = np.asarray(traj.times, dtype=float)
    X, V, Tn = traj.column("X"), traj.column("V"), traj.column("Tnorm")
    Z0_sq = X[0] ** 2 + V[0] ** 2
    mech = mechanical_envelope(c, Z0_sq, t)
    temp = temperature_envelope(c, Tn[0] ** 2, t)
    out = DecayVerification("verified")
    for k in range(len(t)):
        z = X[k] ** 2 + V[k] ** 2
        if z > mech[k] * (1 + 1e-9) + 1e-12:
            out.violations.append(EnvelopeViolation(float(t[k]), "mechanical", float(z), float(mech[k])))
        if Tn[k] ** 2 > temp[k] * (1 + 1e-9) + 1e-12:
            out.violations.append(EnvelopeViolation(float(t[k]), "temperature", float(Tn[k] ** 2),
                                                    float(temp[k])))
    if out.violations:
        out.status = "violated"
    return out


# ---------------------------------------------------------------------------
# empirical decay rates


@dataclass(frozen=True)
class DecayFit:
    quantity: str
    window: tuple
    rate: float
    intercept: float
    r_squared: float
    samples: int


def default_window(times) -> tuple:
    """Last half of the trajectory."""
    t = np.asarray(times, dtype=float)
    return (float(t[0] + 0.5 * (t[-1] - t[0])), float(t[-1]))


def fit_exponential(times, values, window=None, quantity: str = "") -> DecayFit:
    """Least-squares line through ``(t, ln value)``; ``rate`` is minus the slope."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if window is None:
        window = default_window(t)
    lo, hi = window
    if not lo < hi:
        raise ValueError(f"empty fit window {window}")
    mask = (t >= lo) & (t <= hi) & (y > 0) & np.isfinite(y)
    if mask.sum() < 10:
        raise ValueError(f"need at least 10 positive samples in window {window}, got {int(mask.sum())}")
    tt, ly = t[mask], np.log(y[mask])
    A = np.column_stack([tt, np.ones_like(tt)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * tt + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(quantity, (float(lo), float(hi)), float(-slope), float(intercept), r2, int(mask.sum()))


def guaranteed_rates(c: TheoremConstants) -> dict:
    """Decay rates of X, V, Tnorm implied by the envelopes (norms, not squares)."""
    return {"X": c.eps / 3.0, "V": c.eps / 3.0, "Tnorm": min(c.A1, 2.0 * c.eps / 3.0) / 2.0}
