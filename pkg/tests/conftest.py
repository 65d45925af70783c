import numpy as np
import pytest

from tcsflock.diagnostics import Recorder
from tcsflock.harness.config import preset
from tcsflock.harness.sampling import sample_initial_data
from tcsflock.integrator import integrate
from tcsflock.model import CommunicationKernel, ModelParams, ParticleEnsemble


@pytest.fixture(scope="session")
def preset_cfg():
    return preset("paper-sec6")


@pytest.fixture(scope="session")
def preset_state(preset_cfg):
    return sample_initial_data(preset_cfg)


@pytest.fixture(scope="session")
def preset_params(preset_cfg):
    return preset_cfg.model_params()


@pytest.fixture(scope="session")
def preset_trajectory(preset_cfg, preset_state, preset_params):
    """The full t in [0, 50] run; about five seconds, shared across modules."""
    return integrate(preset_state, preset_params, preset_cfg.integrator_config(),
                     observer=Recorder(preset_state, eps=preset_cfg.eps))


@pytest.fixture
def oscillator():
    """A single decoupled particle: x'' = -x."""
    return ParticleEnsemble([[1.0, 0.0]], [[0.0, 0.0]], [5.0])


def random_state(rng, n=8, d=2, T_range=(1.0, 3.0)):
    return ParticleEnsemble(rng.normal(size=(n, d)), rng.normal(size=(n, d)),
                            rng.uniform(*T_range, size=n))


def unit_params(kappa1=1.0, kappa2=1.0, dim=2):
    return ModelParams(kappa1, kappa2, CommunicationKernel(1.0, 1.0),
                       CommunicationKernel(1.0, 1.0), dim)


def admissible_configs(count, n=20, seed=2024, t_end=10.0):
    """Random scenarios near the paper-sec6 one that pass the global flocking conditions."""
    from tcsflock.harness.runner import hypothesis_report

    rng = np.random.default_rng(seed)
    base = preset("paper-sec6")
    found = []
    while len(found) < count:
        shift_x = rng.uniform(-0.2, 0.2, 2)
        shift_v = rng.uniform(-0.2, 0.2, 2)
        T_lo = rng.uniform(8.0, 12.0)
        cfg = base.replace(
            n=n,
            position_box=tuple((a + s, b + s) for (a, b), s in zip(base.position_box, shift_x)),
            velocity_box=tuple((a + s, b + s) for (a, b), s in zip(base.velocity_box, shift_v)),
            temperature_interval=(T_lo, T_lo + rng.uniform(0.05, 0.2)),
            seed=int(rng.integers(0, 2 ** 63)),
            kappa2=float(rng.uniform(60.0, 150.0)),
            t_end=t_end,
        )
        h, _ = hypothesis_report(cfg)
        if h is not None and h.overall:
            found.append(cfg)
    return found


ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
