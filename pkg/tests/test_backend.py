import os
import subprocess
import sys

import numpy as np
import pytest

from tunnelmoments import _backend
from tunnelmoments.potentials import (
    CoRotating,
    CosEnvelope,
    Coulomb3D,
    Free,
    GaussianWell1D,
    HalfCycleSin3,
    Harmonic,
    Hydrogen3D,
    Lab,
    RotatingHalfCycle,
    SinEnvelope,
    Static,
)

W = 0.05811

try:
    Cy = _backend.system_class("cython")
except ImportError:  # pragma: no cover
    Cy = None
Py = _backend.system_class("python")

needs_ext = pytest.mark.skipif(Cy is None, reason="compiled extension not built")

CASES = [
    (GaussianWell1D(0.78), HalfCycleSin3(0.14, W), Lab()),
    (GaussianWell1D(0.78), SinEnvelope(0.1, W, 2), Lab()),
    (GaussianWell1D(0.78), None, Lab()),
    (Free(), HalfCycleSin3(0.1, W), Lab()),
    (Harmonic(k=1.3), Static(0.02), Lab()),
    (Harmonic(k=0.7, dim=3), RotatingHalfCycle(0.1, W), Lab()),
    (Coulomb3D(alpha_I=7.0), Static((0.0, 0.0, 0.015)), Lab()),
    (Coulomb3D(alpha_I=11.0, softening=0.0), HalfCycleSin3(0.05, W), Lab()),
    (Hydrogen3D(), RotatingHalfCycle(0.1, W), Lab()),
    (Hydrogen3D(), CosEnvelope(1.0, W, 2, 1), CoRotating.for_pulse(CosEnvelope(1.0, W, 2, 1))),
    (Free(dim=3), None, Lab()),
]
IDS = [f"{type(m).__name__}-{type(p).__name__}-{type(f).__name__}" for m, p, f in CASES]


def _states(dim, classical, rng, n=25):
    for _ in range(n):
        x = rng.uniform(-4, 4, dim)
        p = rng.uniform(-1, 1, dim)
        if classical:
            yield np.concatenate([x, p])
        else:
            yield np.concatenate([x, p, rng.uniform(0.3, 3, dim), rng.uniform(-1, 1, dim)])


@needs_ext
@pytest.mark.parametrize("classical", [False, True])
@pytest.mark.parametrize("model, pulse, frame", CASES, ids=IDS)
def test_kernels_agree(model, pulse, frame, classical):
    a = Cy(model, pulse, frame, 0.25, classical)
    b = Py(model, pulse, frame, 0.25, classical)
    rng = np.random.default_rng(5)
    for y in _states(model.dim, classical, rng):
        t = float(rng.uniform(-5, 60))
        fa, fb = a.rhs(t, y), b.rhs(t, y)
        np.testing.assert_allclose(fa, fb, rtol=1e-12, atol=1e-14)
        assert a.hamiltonian(t, y) == pytest.approx(b.hamiltonian(t, y), rel=1e-12, abs=1e-14)
        assert a.free_energy(t, y) == pytest.approx(b.free_energy(t, y), rel=1e-12, abs=1e-14)
        ya, ga, ea, da = a.step(t, y, fa, 0.1, 1e-9, 1e-11)
        yb, gb, eb, db = b.step(t, y, fb, 0.1, 1e-9, 1e-11)
        np.testing.assert_allclose(ya, yb, rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(ga, gb, rtol=1e-11, atol=1e-13)
        # err is a cancelling sum divided by atol: roundoff h·eps·|k|/atol ≈ 1e-6
        assert ea == pytest.approx(eb, rel=1e-8, abs=1e-5)
        if da is not None or db is not None:
            np.testing.assert_allclose(da, db, rtol=1e-11, atol=1e-13)


@needs_ext
def test_out_of_domain_stage_is_rejected_by_both():
    model = GaussianWell1D(0.78)
    y = np.array([0.0, 0.0, 0.05, -5.0])
    for cls in (Cy, Py):
        k = cls(model, None, Lab(), 0.25)
        _, _, err, dense = k.step(0.0, y, k.rhs(0.0, y), 0.5, 1e-9, 1e-11)
        assert err == np.inf and dense is None


def test_unknown_backend_name():
    with pytest.raises(ValueError):
        _backend.system_class("fortran")


def test_environment_forces_fallback():
    code = "from tunnelmoments import _backend, dynamics; print(_backend.BACKEND, dynamics.System.backend)"
    env = {**os.environ, "TUNNELMOMENTS_BACKEND": "python"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["python", "python"]


@needs_ext
def test_compiled_backend_is_default():
    code = "from tunnelmoments import _backend; print(_backend.BACKEND)"
    env = {k: v for k, v in os.environ.items() if k != "TUNNELMOMENTS_BACKEND"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "cython"
