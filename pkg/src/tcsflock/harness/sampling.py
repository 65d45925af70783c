"""Seeded initial data with a counter-based generator.

Coordinate ``k`` of particle ``a`` is a function of ``(seed, a, k)`` only: each
particle gets its own Philox stream keyed by ``seed`` with counter ``a``, and
coordinates are read off that stream in the fixed order ``x_1..x_d, v_1..v_d, T``.
"""

from __future__ import annotations

import numpy as np

from ..model import ParticleEnsemble
from .config import ScenarioConfig

_MANTISSA = 2.0 ** -53


def uniform_open(seed: int, particle: int, count: int) -> np.ndarray:
    """``count`` uniforms in (0, 1) for ``particle`` under ``seed``."""
    bg = np.random.Philox(key=seed, counter=[particle, 0, 0, 0])
    raw = bg.random_raw(count)
    return ((raw >> np.uint64(11)).astype(float) + 0.5) * _MANTISSA


def sample_initial_data(cfg: ScenarioConfig) -> ParticleEnsemble:
    d = cfg.dim
    intervals = list(cfg.position_box) + list(cfg.velocity_box) + [cfg.temperature_interval]
    lo = np.array([a for a, _ in intervals])
    width = np.array([b - a for a, b in intervals])
    u = np.stack([uniform_open(cfg.seed, a, 2 * d + 1) for a in range(cfg.n)])
    coords = lo + width * u
    # degenerate intervals stay exact
    coords[:, width == 0] = lo[width == 0]
    return ParticleEnsemble(coords[:, :d], coords[:, d:2 * d], coords[:, 2 * d])
