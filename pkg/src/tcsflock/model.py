"""Thermodynamic Cucker-Smale particles in the harmonic potential |x|^2/2.

State is ``(x, v, T)`` with ``x, v`` of shape ``(n, d)`` and ``T`` of shape
``(n,)``.  The right-hand side is

    dx_a/dt = v_a
    dv_a/dt = (k1/n) sum_b phi_ab ((v_b - v_c)/T_b - (v_a - v_c)/T_a) - x_a
    d(T_a + |v_a|^2/2)/dt = (k2/n) sum_b zeta_ab (1/T_a - 1/T_b)
                            + (k1/n) sum_b phi_ab (...) . v_c

and the temperature equation is solved for dT_a/dt using the computed dv_a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InadmissibleInitialData, KernelDomainError, TemperatureCollapse

# The model is singular at T = 0.
COLLAPSE_THRESHOLD = 1e-12


def _check_distance(r):
    r = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(r)) or np.any(r < 0):
        raise KernelDomainError("kernel distance must be finite and nonnegative")
    return r


@dataclass(frozen=True)
class CommunicationKernel:
    """``c * (1 + r^2) ** (-beta/2)``: positive, nonincreasing, Lipschitz."""

    amplitude: float = 1.0
    exponent: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.amplitude) and self.amplitude > 0):
            raise ValueError(f"kernel amplitude must be positive, got {self.amplitude}")
        if not (math.isfinite(self.exponent) and self.exponent >= 0):
            raise ValueError(f"kernel exponent must be nonnegative, got {self.exponent}")

    def __call__(self, r):
        r = _check_distance(r)
        out = self.of_squared(r * r)
        return float(out) if out.ndim == 0 else out

    def of_squared(self, r2):
        """Evaluate from squared distances (skips the square root)."""
        if self.exponent == 1.0:
            return self.amplitude / np.sqrt(1.0 + r2)
        return self.amplitude * (1.0 + r2) ** (-0.5 * self.exponent)

    @property
    def lipschitz(self) -> float:
        # |d/dr| = c*beta*r*(1+r^2)^(-beta/2-1) <= c*beta*r/(1+r^2) <= c*beta/2
        return 0.5 * self.amplitude * self.exponent


class UserKernel:
    """Wrap an arbitrary vectorised kernel ``func(r) -> array``.

    The function is spot-checked for positivity and monotonicity on a grid
    when the kernel is built; a failing kernel is rejected.
    """

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], name: str = "user",
                 check_grid: np.ndarray | None = None):
        self.func = func
        self.name = name
        grid = np.linspace(0.0, 100.0, 2001) if check_grid is None else np.asarray(check_grid, float)
        vals = np.asarray(func(grid), dtype=float)
        if vals.shape != grid.shape:
            raise ValueError("user kernel must be vectorised over its argument")
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise ValueError(f"user kernel {name!r} is not positive on [0, {grid[-1]}]")
        if np.any(np.diff(vals) > 1e-14 * np.abs(vals[:-1])):
            raise ValueError(f"user kernel {name!r} is not nonincreasing")

    def __call__(self, r):
        r = _check_distance(r)
        out = np.asarray(self.func(r), dtype=float)
        return float(out) if out.ndim == 0 else out

    def of_squared(self, r2):
        return np.asarray(self.func(np.sqrt(r2)), dtype=float)

    def __repr__(self):
        return f"UserKernel({self.name!r})"


@dataclass(frozen=True)
class ModelParams:
    kappa1: float
    kappa2: float
    phi: CommunicationKernel = field(default_factory=CommunicationKernel)
    zeta: CommunicationKernel = field(default_factory=CommunicationKernel)
    dim: int = 2

    def __post_init__(self):
        # zero couplings are allowed: they switch a mechanism off in tests
        if not (self.kappa1 >= 0 and self.kappa2 >= 0):
            raise ValueError("coupling strengths must be nonnegative")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")


def _frozen(a, shape=None) -> np.ndarray:
    a = np.array(a, dtype=float)
    if shape is not None:
        a = a.reshape(shape)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ParticleEnsemble:
    """Positions ``x (n, d)``, velocities ``v (n, d)``, temperatures ``T (n,)``."""

    x: np.ndarray
    v: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        v = np.array(self.v, dtype=float)
        T = np.array(self.T, dtype=float).reshape(-1)
        if x.ndim == 1:
            x = x.reshape(len(T), -1)
        if v.ndim == 1:
            v = v.reshape(len(T), -1)
        if x.ndim != 2 or x.shape != v.shape or x.shape[0] != T.shape[0] or x.shape[0] < 1:
            raise ValueError(f"inconsistent shapes x{x.shape} v{v.shape} T{T.shape}")
        if not np.all(T > 0):
            raise InadmissibleInitialData("all temperatures must be strictly positive")
        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "v", _frozen(v))
        object.__setattr__(self, "T", _frozen(T))

    @property
    def n(self) -> int:
        return self.T.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ParticleEnsemble):
            return NotImplemented
        return (np.array_equal(self.x, other.x) and np.array_equal(self.v, other.v)
                and np.array_equal(self.T, other.T))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Derivative:
    dx: np.ndarray
    dv: np.ndarray
    dT: np.ndarray


def evaluate_kernel(k, r):
    return k(r)


def center_of_mass(s: ParticleEnsemble):
    """Return ``(x_c, v_c, T_c)``, the arithmetic means."""
    return s.x.mean(axis=0), s.v.mean(axis=0), float(s.T.mean())


@dataclass(frozen=True, eq=False)
class ConservedQuantities:
    """Initial-data constants from which ``T_inf(t)``, ``T_m`` and ``T_M`` follow."""

    n: int
    x_c0: np.ndarray
    v_c0: np.ndarray
    T_c0: float
    half_mean_sq_speed0: float
    energy0: float

    @property
    def T_M(self) -> float:
        return self.T_c0 + self.half_mean_sq_speed0

    @property
    def T_m(self) -> float:
        return self.T_M - float(self.v_c0 @ self.v_c0 + self.x_c0 @ self.x_c0)

    @property
    def zc0_norm(self) -> float:
        return math.sqrt(float(self.v_c0 @ self.v_c0 + self.x_c0 @ self.x_c0))

    def center_of_mass_at(self, t: float):
        """Exact harmonic-oscillator mean at time ``t``."""
        c, s = math.cos(t), math.sin(t)
        return c * self.x_c0 + s * self.v_c0, -s * self.x_c0 + c * self.v_c0


def conserved_quantities(s0: ParticleEnsemble) -> ConservedQuantities:
    x_c, v_c, T_c = center_of_mass(s0)
    return ConservedQuantities(
        n=s0.n,
        x_c0=_frozen(x_c),
        v_c0=_frozen(v_c),
        T_c0=T_c,
        half_mean_sq_speed0=0.5 * float(np.mean(np.sum(s0.v * s0.v, axis=1))),
        energy0=total_energy(s0),
    )


def asymptotic_temperature(cq: ConservedQuantities, v_c_now) -> float:
    v_c_now = np.asarray(v_c_now, dtype=float)
    return -0.5 * float(v_c_now @ v_c_now) + cq.T_c0 + cq.half_mean_sq_speed0


def extreme_temperature_bounds(s0: ParticleEnsemble):
    """Return ``(T_m, T_M)`` of the initial data.

    Raises InadmissibleInitialData when ``T_m <= 0``.
    """
    cq = conserved_quantities(s0)
    if not cq.T_m > 0:
        raise InadmissibleInitialData(f"inadmissible initial data: T_m = {cq.T_m:.6g} <= 0")
    return cq.T_m, cq.T_M


def total_energy(s: ParticleEnsemble) -> float:
    return float(np.sum(s.T) + 0.5 * np.sum(s.v * s.v))


def squared_distances(x: np.ndarray) -> np.ndarray:
    """Matrix of |x_a - x_b|^2, exactly symmetric."""
    r2 = np.zeros((x.shape[0], x.shape[0]))
    for k in range(x.shape[1]):
        diff = x[:, k, None] - x[None, :, k]
        r2 += diff * diff
    return r2


def pair_distances(x: np.ndarray) -> np.ndarray:
    return np.sqrt(squared_distances(x))


def coupling_terms(x, w, inv_T, p: ModelParams):
    """Alignment force and heat exchange for weights ``w = (v - v_c) / T``.

    Returns ``(align, heat)`` with
    ``align_a = (k1/n) sum_b phi_ab (w_b - w_a)`` and
    ``heat_a = (k2/n) sum_b zeta_ab (1/T_a - 1/T_b)``.
    """
    n = x.shape[0]
    r2 = squared_distances(x)
    phi = p.phi.of_squared(r2)
    align = np.empty_like(w)
    for k in range(w.shape[1]):
        # entries phi_ab (w_b - w_a) are exactly antisymmetric, so column sums cancel
        align[:, k] = np.sum(phi * (w[None, :, k] - w[:, None, k]), axis=1)
    align *= p.kappa1 / n
    if p.zeta == p.phi:
        zeta = phi
    else:
        zeta = p.zeta.of_squared(r2)
    heat = (p.kappa2 / n) * np.sum(zeta * (inv_T[:, None] - inv_T[None, :]), axis=1)
    return align, heat


def rhs_arrays(x, v, T, p: ModelParams):
    """Array-level right-hand side; returns ``(dx, dv, dT)``."""
    if not np.all(T > COLLAPSE_THRESHOLD):
        i = int(np.argmin(T))
        raise TemperatureCollapse(f"temperature collapse: T[{i}] = {T[i]:.3g}")
    v_c = v.mean(axis=0)
    inv_T = 1.0 / T
    # self-term (b == a) is identically zero
    align, heat = coupling_terms(x, (v - v_c) * inv_T[:, None], inv_T, p)
    dv = align - x
    dT = heat + np.sum(align * v_c, axis=1) - np.sum(v * dv, axis=1)
    return v.copy(), dv, dT


def rhs(s: ParticleEnsemble, p: ModelParams) -> Derivative:
    dx, dv, dT = rhs_arrays(s.x, s.v, s.T, p)
    return Derivative(_frozen(dx), _frozen(dv), _frozen(dT))
