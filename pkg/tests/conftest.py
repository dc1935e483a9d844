"""Shared fixtures: calibrated models, expensive reference runs, and the
acceptance report printed at the end of the session."""

from __future__ import annotations

import pytest

from tunnelmoments import analysis as an
from tunnelmoments.dynamics import IntegratorConfig, calibrate_well_depth, ground_state_init, integrate
from tunnelmoments.potentials import GaussianWell1D, HalfCycleSin3, Hydrogen3D, RotatingHalfCycle

OMEGA = 0.05811
HALF_CYCLE_AMPLITUDES = (0.14, 0.16, 0.18)
HYDROGEN_AMPLITUDES = (0.05, 0.075, 0.1, 0.125, 0.15, 0.175, 0.2)

_REPORT = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_REPORT] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_REPORT, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)


@pytest.fixture
def report(request):
    """``report(n, ok, detail)`` prints and records one PASS/FAIL line."""

    def _report(n: int, ok: bool, detail: str) -> bool:
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        request.config.stash[_REPORT].append((n, line))
        return ok

    return _report


@pytest.fixture(scope="session")
def gauss_depth():
    return calibrate_well_depth(-2.0 / 9.0)


@pytest.fixture(scope="session")
def gauss_model(gauss_depth):
    return GaussianWell1D(gauss_depth)


@pytest.fixture(scope="session")
def half_cycle_runs(gauss_model):
    """Half-cycle runs of the calibrated Gaussian well, keyed by amplitude."""
    gs = ground_state_init(gauss_model)
    out = {}
    for F0 in HALF_CYCLE_AMPLITUDES:
        pulse = HalfCycleSin3(F0, OMEGA)
        traj = integrate(gs.state, gauss_model, pulse, cfg=IntegratorConfig(t_end=150.0))
        out[F0] = {
            "traj": traj,
            "energy": an.exit_time_energy(traj),
            "backprop": an.exit_time_momentum_backprop(traj, t_f=150.0),
        }
    return out


@pytest.fixture(scope="session")
def hydrogen_runs():
    """Rotating half-cycle runs of hydrogen out to the 1000 a.u. detector."""
    model = Hydrogen3D()
    gs = ground_state_init(model)
    cfg = IntegratorConfig(t_end=5000.0)
    out = {}
    for E0 in HYDROGEN_AMPLITUDES:
        pulse = RotatingHalfCycle(E0, OMEGA)
        traj = integrate(gs.state, model, pulse, cfg=cfg, stop=an.detection_stop(1000.0, 3))
        series = an.transverse_fluctuation(traj, dt=0.05, t_max=300.0)
        out[E0] = {
            "traj": traj,
            "series": series,
            "energy": an.exit_time_energy(traj),
            "spot": an.spot_size(traj, 1000.0),
            "angle": an.offset_angle(traj, detection_radius=1000.0).final,
            "fit": an.exit_time_fluct_fit(series),
            "inflection": an.exit_time_fluct_inflection(series),
        }
    return out

