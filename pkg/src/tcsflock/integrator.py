"""Fixed-step classical RK4 for the TCS system, with trajectory recording."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .errors import NumericalBlowUp, NumericalFailure, TemperatureCollapse
from .model import COLLAPSE_THRESHOLD, ModelParams, ParticleEnsemble, rhs_arrays


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 0.01
    t_end: float = 50.0
    record_stride: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (math.isfinite(self.t_end) and self.t_end >= self.dt):
            raise ValueError(f"t_end must be >= dt, got t_end={self.t_end}, dt={self.dt}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError(f"record_stride must be a positive integer, got {self.record_stride}")

    def step_times(self) -> np.ndarray:
        """Grid ``0, dt, 2dt, ..., t_end``; the last interval may be shorter."""
        n_steps = math.ceil(self.t_end / self.dt - 1e-9)
        times = np.arange(n_steps + 1, dtype=float) * self.dt
        times[-1] = self.t_end
        return times


@dataclass
class Trajectory:
    initial: ParticleEnsemble
    times: np.ndarray
    records: list = field(default_factory=list)
    states: list | None = None

    def column(self, name: str) -> np.ndarray:
        """Stack attribute ``name`` over all records."""
        return np.array([getattr(r, name) for r in self.records])


def rk4_arrays(f: Callable[[float, Sequence[np.ndarray]], Sequence[np.ndarray]],
               t: float, y: Sequence[np.ndarray], dt: float) -> tuple:
    """One classical RK4 step for a state stored as a tuple of arrays."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, tuple(a + 0.5 * dt * k for a, k in zip(y, k1)))
    k3 = f(t + 0.5 * dt, tuple(a + 0.5 * dt * k for a, k in zip(y, k2)))
    k4 = f(t + dt, tuple(a + dt * k for a, k in zip(y, k3)))
    return tuple(a + (dt / 6.0) * (q1 + 2.0 * q2 + 2.0 * q3 + q4)
                 for a, q1, q2, q3, q4 in zip(y, k1, k2, k3, k4))


def _system(p: ModelParams):
    def f(t, y):
        return rhs_arrays(y[0], y[1], y[2], p)
    return f


def _check_finite(y):
    if not all(np.all(np.isfinite(a)) for a in y):
        raise NumericalBlowUp("numerical blow-up: non-finite state")
    if len(y) == 3 and not np.all(y[2] > COLLAPSE_THRESHOLD):
        raise TemperatureCollapse(f"temperature collapse: min T = {np.min(y[2]):.3g}")


def rk4_step(s: ParticleEnsemble, p: ModelParams, dt: float) -> ParticleEnsemble:
    if dt < 0 or not math.isfinite(dt):
        raise ValueError(f"dt must be finite and nonnegative, got {dt}")
    if dt == 0:
        return s
    y = rk4_arrays(_system(p), 0.0, (s.x, s.v, s.T), dt)
    _check_finite(y)
    return ParticleEnsemble(*y)


def integrate(s0: ParticleEnsemble, p: ModelParams, cfg: IntegratorConfig,
              observer: Callable[[float, ParticleEnsemble], Any] | None = None,
              keep_states: bool = False) -> Trajectory:
    """Step from 0 to ``cfg.t_end``, calling ``observer(t, state)`` at each record.

    The default observer is :class:`tcsflock.diagnostics.Recorder` built from
    ``s0``.  The final time is always recorded.  Step failures are re-raised
    with the time of the failing step attached.
    """
    if observer is None:
        from .diagnostics import Recorder
        observer = Recorder(s0)
    grid = cfg.step_times()
    f = _system(p)
    y = (np.array(s0.x), np.array(s0.v), np.array(s0.T))
    state = s0
    times, records = [0.0], [observer(0.0, s0)]
    states = [s0] if keep_states else None
    last = len(grid) - 1
    for k in range(1, len(grid)):
        t0, t1 = grid[k - 1], grid[k]
        try:
            y = rk4_arrays(f, t0, y, t1 - t0)
            _check_finite(y)
        except NumericalFailure as exc:
            exc.t = float(t0)
            raise
        if k % cfg.record_stride == 0 or k == last:
            state = ParticleEnsemble(*y)
            times.append(float(t1))
            records.append(observer(float(t1), state))
            if keep_states:
                states.append(state)
    return Trajectory(initial=s0, times=np.array(times), records=records, states=states)
