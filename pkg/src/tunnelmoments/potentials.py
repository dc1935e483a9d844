"""Classical potentials, external field pulses and reference frames.

Sign conventions follow the Hamiltonian written for each model:

==================  =====================================================
``Coulomb3D``       V = −1/|x| − x·F − α_I (F·x)/|x|³
``Hydrogen3D``      V = −1/|r| + r·E(t)
``GaussianWell1D``  V = −D exp(−x²) + x F(t)
``Free``            V = x·F
``Harmonic``        V = k|x|²/2 + x·F
==================  =====================================================

Coulomb-type models replace ``|x|`` by ``sqrt(|x|² + ε²)``.
Every field is returned as a 3-vector; one-dimensional models read the
first component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate, optimize

from .errors import ConfigurationError, DomainError, SingularityError

#: W/cm² per (field in a.u.)², i.e. ½ c ε₀ E_au².
INTENSITY_AU_TO_WCM2 = 3.50944758e16

# kernel codes, shared with the compiled and pure-Python kernels
MODEL_FREE, MODEL_HARMONIC, MODEL_GAUSSIAN, MODEL_COULOMB, MODEL_HYDROGEN = range(5)
PULSE_STATIC, PULSE_HALF_CYCLE, PULSE_SIN_ENVELOPE, PULSE_COS_ENVELOPE, PULSE_ROTATING = range(5)


# --------------------------------------------------------------------------
# potential models
# --------------------------------------------------------------------------

def _field_for(dim, F):
    F = np.zeros(3) if F is None else np.asarray(F, dtype=float)
    if F.ndim == 0:
        F = np.array([float(F), 0.0, 0.0])
    return F[..., :dim]


def _radius(r, eps):
    r2 = np.sum(r * r, axis=-1)
    if eps == 0.0 and np.any(r2 == 0.0):
        raise SingularityError("Coulomb potential evaluated at r = 0 without softening")
    return np.sqrt(r2 + eps * eps)


@dataclass(frozen=True)
class Free:
    """No binding potential; the field couples as ``+x·F``."""

    dim: int = 1

    def __post_init__(self):
        if self.dim not in (1, 3):
            raise ConfigurationError(f"dim must be 1 or 3, got {self.dim}")

    def value(self, r, F=None):
        r = np.asarray(r, dtype=float)
        return r @ _field_for(self.dim, F)

    def gradient(self, r, F=None):
        r = np.asarray(r, dtype=float)
        return np.broadcast_to(_field_for(self.dim, F), r.shape).copy()

    def hessian_diag(self, r, F=None):
        return np.zeros_like(np.asarray(r, dtype=float))

    def kernel_spec(self):
        return MODEL_FREE, ()


@dataclass(frozen=True)
class Harmonic:
    """Isotropic oscillator ``k|x|²/2``; the field couples as ``+x·F``."""

    k: float = 1.0
    dim: int = 1

    def __post_init__(self):
        if self.dim not in (1, 3):
            raise ConfigurationError(f"dim must be 1 or 3, got {self.dim}")

    def value(self, r, F=None):
        r = np.asarray(r, dtype=float)
        return 0.5 * self.k * np.sum(r * r, axis=-1) + r @ _field_for(self.dim, F)

    def gradient(self, r, F=None):
        r = np.asarray(r, dtype=float)
        return self.k * r + _field_for(self.dim, F)

    def hessian_diag(self, r, F=None):
        return np.full_like(np.asarray(r, dtype=float), self.k)

    def kernel_spec(self):
        return MODEL_HARMONIC, (self.k,)


@dataclass(frozen=True)
class GaussianWell1D:
    """One-dimensional well ``−D exp(−x²)`` driven as ``+x F(t)``."""

    depth: float = 0.5
    dim = 1

    def __post_init__(self):
        if not self.depth > 0:
            raise DomainError(f"well depth must be positive, got {self.depth}")

    def value(self, r, F=None):
        r = np.asarray(r, dtype=float)
        x = r[..., 0]
        return -self.depth * np.exp(-x * x) + x * _field_for(1, F)[0]

    def gradient(self, r, F=None):
        r = np.asarray(r, dtype=float)
        x = r[..., :1]
        return 2.0 * self.depth * x * np.exp(-x * x) + _field_for(1, F)

    def hessian_diag(self, r, F=None):
        r = np.asarray(r, dtype=float)
        x = r[..., :1]
        return 2.0 * self.depth * np.exp(-x * x) * (1.0 - 2.0 * x * x)

    def kernel_spec(self):
        return MODEL_GAUSSIAN, (self.depth,)


@dataclass(frozen=True)
class Coulomb3D:
    """Screened ion with static polarizability ``alpha_I`` in a field ``F``."""

    alpha_I: float = 0.0
    softening: float = 1e-6
    dim = 3

    def __post_init__(self):
        if self.softening < 0:
            raise DomainError(f"softening must be non-negative, got {self.softening}")

    def value(self, r, F=None):
        r = np.asarray(r, dtype=float)
        F = _field_for(3, F)
        rho = _radius(r, self.softening)
        rF = r @ F
        return -1.0 / rho - rF - self.alpha_I * rF / rho ** 3

    def gradient(self, r, F=None):
        r = np.asarray(r, dtype=float)
        F = _field_for(3, F)
        rho = _radius(r, self.softening)[..., None]
        rF = (r @ F)[..., None]
        return r / rho ** 3 - F - self.alpha_I * (F / rho ** 3 - 3.0 * rF * r / rho ** 5)

    def hessian_diag(self, r, F=None):
        r = np.asarray(r, dtype=float)
        F = _field_for(3, F)
        rho = _radius(r, self.softening)[..., None]
        rF = (r @ F)[..., None]
        coul = 1.0 / rho ** 3 - 3.0 * r * r / rho ** 5
        pol = -6.0 * F * r / rho ** 5 - 3.0 * rF / rho ** 5 + 15.0 * rF * r * r / rho ** 7
        return coul - self.alpha_I * pol

    def kernel_spec(self):
        return MODEL_COULOMB, (self.alpha_I, self.softening)


@dataclass(frozen=True)
class Hydrogen3D:
    """Hydrogen atom driven as ``+r·E(t)``."""

    softening: float = 1e-6
    dim = 3

    def __post_init__(self):
        if self.softening < 0:
            raise DomainError(f"softening must be non-negative, got {self.softening}")

    def value(self, r, F=None):
        r = np.asarray(r, dtype=float)
        return -1.0 / _radius(r, self.softening) + r @ _field_for(3, F)

    def gradient(self, r, F=None):
        r = np.asarray(r, dtype=float)
        rho = _radius(r, self.softening)[..., None]
        return r / rho ** 3 + _field_for(3, F)

    def hessian_diag(self, r, F=None):
        r = np.asarray(r, dtype=float)
        rho = _radius(r, self.softening)[..., None]
        return 1.0 / rho ** 3 - 3.0 * r * r / rho ** 5

    def kernel_spec(self):
        return MODEL_HYDROGEN, (self.softening,)


PotentialModel = Union[Free, Harmonic, GaussianWell1D, Coulomb3D, Hydrogen3D]


def classical_potential(model: PotentialModel, r, F=None) -> float:
    """Classical potential of ``model`` at position ``r`` in field ``F``."""
    r = np.asarray(r, dtype=float).reshape(-1)
    if r.size != model.dim:
        raise ConfigurationError(f"position has {r.size} components, model needs {model.dim}")
    return float(model.value(r, F))


# --------------------------------------------------------------------------
# pulses
# --------------------------------------------------------------------------

def _check_omega(omega):
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega}")


def _check_amplitude(name, value):
    if value < 0:
        raise DomainError(f"{name} must be non-negative, got {value}")


def _inside(t, start, end):
    return (t > start) & (t < end)


@dataclass(frozen=True)
class Static:
    """Constant field, switched on for all times."""

    F: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        F = tuple(float(v) for v in np.broadcast_to(np.asarray(self.F, dtype=float), (3,)))
        object.__setattr__(self, "F", F)

    dim = 3

    def _field(self, t):
        return np.broadcast_to(np.array(self.F), t.shape + (3,)).copy()

    def support(self):
        return (-math.inf, math.inf)

    def kernel_spec(self):
        return PULSE_STATIC, self.F


@dataclass(frozen=True)
class HalfCycleSin3:
    """``F(t) = −F0 sin³(ωt)`` on ``0 < t < π/ω`` (one-dimensional)."""

    F0: float
    omega: float
    dim = 1

    def __post_init__(self):
        _check_amplitude("F0", self.F0)
        _check_omega(self.omega)

    def _field(self, t):
        out = np.zeros(t.shape + (3,))
        inside = _inside(t, 0.0, math.pi / self.omega)
        out[..., 0] = np.where(inside, -self.F0 * np.sin(self.omega * t) ** 3, 0.0)
        return out

    def support(self):
        return (0.0, math.pi / self.omega)

    def kernel_spec(self):
        return PULSE_HALF_CYCLE, (self.F0, self.omega)


@dataclass(frozen=True)
class SinEnvelope:
    """N-cycle pulse ``F(t) = −F0 sin²(ωt/2N) sin(ωt)`` on ``0 < t < 2πN/ω``.

    ``N = 1/2`` coincides with :class:`HalfCycleSin3`.
    """

    F0: float
    omega: float
    N: float = 0.5
    dim = 1

    def __post_init__(self):
        _check_amplitude("F0", self.F0)
        _check_omega(self.omega)
        if self.N < 0.5:
            raise DomainError(f"N must be at least 1/2, got {self.N}")

    def _field(self, t):
        out = np.zeros(t.shape + (3,))
        inside = _inside(t, 0.0, 2.0 * math.pi * self.N / self.omega)
        env = np.sin(self.omega * t / (2.0 * self.N)) ** 2
        out[..., 0] = np.where(inside, -self.F0 * env * np.sin(self.omega * t), 0.0)
        return out

    def support(self):
        return (0.0, 2.0 * math.pi * self.N / self.omega)

    def kernel_spec(self):
        return PULSE_SIN_ENVELOPE, (self.F0, self.omega, self.N)


@dataclass(frozen=True)
class CosEnvelope:
    """cos⁴-envelope pulse of N cycles and ellipticity ε in the x-y plane.

    Centred on ``t = 0`` with support ``|t| < Nπ/ω``.  For ``N = 2, ε = 1``
    the field is ``(A0ω/√2) cos³(ωt/4) (sin 5ωt/4, cos 5ωt/4)``.
    """

    A0: float
    omega: float
    N: float = 2.0
    epsilon: float = 1.0
    dim = 2

    def __post_init__(self):
        _check_amplitude("A0", self.A0)
        _check_omega(self.omega)
        if self.N < 0.5:
            raise DomainError(f"N must be at least 1/2, got {self.N}")

    def _field(self, t):
        w, N, eps = self.omega, self.N, self.epsilon
        u = w * t / (2.0 * N)
        c, sn = np.cos(u), np.sin(u)
        amp = self.A0 * w / math.sqrt(1.0 + eps * eps)
        wt = w * t
        ex = c ** 4 * np.sin(wt) + (2.0 / N) * c ** 3 * sn * np.cos(wt)
        ey = eps * (c ** 4 * np.cos(wt) - (2.0 / N) * c ** 3 * sn * np.sin(wt))
        half = math.pi * N / w
        inside = _inside(t, -half, half)
        out = np.zeros(t.shape + (3,))
        out[..., 0] = np.where(inside, amp * ex, 0.0)
        out[..., 1] = np.where(inside, amp * ey, 0.0)
        return out

    def support(self):
        half = math.pi * self.N / self.omega
        return (-half, half)

    def kernel_spec(self):
        return PULSE_COS_ENVELOPE, (self.A0, self.omega, self.N, self.epsilon)


@dataclass(frozen=True)
class RotatingHalfCycle:
    """``E(t) = −E0 sin²(ωt) (sin ωt, cos ωt, 0)`` on ``0 < t < π/ω``."""

    E0: float
    omega: float
    dim = 3

    def __post_init__(self):
        _check_amplitude("E0", self.E0)
        _check_omega(self.omega)

    def _field(self, t):
        wt = self.omega * t
        inside = _inside(t, 0.0, math.pi / self.omega)
        amp = np.where(inside, -self.E0 * np.sin(wt) ** 2, 0.0)
        out = np.zeros(t.shape + (3,))
        out[..., 0] = amp * np.sin(wt)
        out[..., 1] = amp * np.cos(wt)
        return out

    def support(self):
        return (0.0, math.pi / self.omega)

    def kernel_spec(self):
        return PULSE_ROTATING, (self.E0, self.omega)


FieldPulse = Union[Static, HalfCycleSin3, SinEnvelope, CosEnvelope, RotatingHalfCycle]


def field_vector(pulse: FieldPulse, t):
    """Field 3-vector at ``t``; shape ``(3,)`` for scalar ``t``, else ``(n, 3)``."""
    if pulse is None:
        pulse = Static()
    t_arr = np.asarray(t, dtype=float)
    out = pulse._field(t_arr.reshape(-1))
    return out[0] if t_arr.ndim == 0 else out.reshape(t_arr.shape + (3,))


def peak_time(pulse: FieldPulse) -> float:
    """Instant of maximum field magnitude."""
    if pulse is None or isinstance(pulse, Static):
        return 0.0
    if isinstance(pulse, (HalfCycleSin3, RotatingHalfCycle)):
        return math.pi / (2.0 * pulse.omega)
    start, end = pulse.support()
    grid = np.linspace(start, end, 20001)
    mag = np.linalg.norm(field_vector(pulse, grid), axis=-1)
    i = int(np.argmax(mag))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = optimize.minimize_scalar(
        lambda t: -np.linalg.norm(field_vector(pulse, t)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-11},
    )
    return float(res.x)


def fluence(pulse: FieldPulse) -> float:
    """Time integral of ``|F(t)|²`` over the pulse support."""
    start, end = pulse.support()
    if not math.isfinite(start) or not math.isfinite(end):
        raise DomainError("fluence of a static field is unbounded")
    val, _ = integrate.quad(
        lambda t: float(np.sum(field_vector(pulse, t) ** 2)),
        start,
        end,
        limit=400,
        epsabs=0.0,
        epsrel=1e-13,
    )
    return val


# --------------------------------------------------------------------------
# frames
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Lab:
    rate = 0.0


@dataclass(frozen=True)
class CoRotating:
    """Frame rotating with the field; ``R = S⁻¹ r`` with
    ``S(φ) = [[sin φ, −cos φ], [cos φ, sin φ]]`` and ``φ = rate·t``."""

    rate: float

    def __post_init__(self):
        if not math.isfinite(self.rate):
            raise DomainError(f"frame rate must be finite, got {self.rate}")

    @classmethod
    def for_pulse(cls, pulse: CosEnvelope) -> "CoRotating":
        return cls(corotating_rate(pulse))


FrameSpec = Union[Lab, CoRotating]


def rotation_matrix(phi: float) -> np.ndarray:
    """The in-plane matrix ``S(φ)`` embedded in 3-D (z untouched)."""
    s, c = math.sin(phi), math.cos(phi)
    return np.array([[s, -c, 0.0], [c, s, 0.0], [0.0, 0.0, 1.0]])


def frame_field(pulse: FieldPulse, frame: FrameSpec, t: float) -> np.ndarray:
    E = field_vector(pulse, t)
    if frame is None or isinstance(frame, Lab) or not frame.rate:
        return E
    return rotation_matrix(frame.rate * t).T @ E


def _check_circular_two_cycle(pulse):
    if not isinstance(pulse, CosEnvelope) or pulse.N != 2 or pulse.epsilon != 1:
        raise ConfigurationError(
            "co-rotating field is only defined for a circular (ε=1) two-cycle (N=2) CosEnvelope"
        )


def corotating_rate(pulse: CosEnvelope) -> float:
    _check_circular_two_cycle(pulse)
    return 1.25 * pulse.omega


def corotating_field(pulse: CosEnvelope, t):
    """Field amplitude along the fixed axis 1 of the co-rotating frame."""
    _check_circular_two_cycle(pulse)
    t = np.asarray(t, dtype=float)
    start, end = pulse.support()
    amp = pulse.A0 * pulse.omega / math.sqrt(2.0) * np.cos(pulse.omega * t / 4.0) ** 3
    out = np.where(_inside(t, start, end), amp, 0.0)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# derived pulse quantities
# --------------------------------------------------------------------------

def keldysh(omega: float, Ip: float, F: float) -> tuple[float, float]:
    """Keldysh time ``√(2|Ip|)/F`` and parameter ``ω τ_K``."""
    if not F > 0:
        raise DomainError(f"field amplitude must be positive, got {F}")
    tau = math.sqrt(2.0 * abs(Ip)) / F
    return tau, omega * tau


def intensity_conversion(F: float) -> float:
    """Peak intensity in W/cm² of a field amplitude in atomic units."""
    if F < 0:
        raise DomainError(f"field amplitude must be non-negative, got {F}")
    return INTENSITY_AU_TO_WCM2 * F * F


def fluence_matched_amplitude(omega: float, reference: tuple[float, float]) -> float:
    """Half-cycle amplitude delivering the same ∫F²dt as ``(F0_ref, ω_ref)``.

    ``∫ sin⁶ = 5π/16`` per half period, so the fluence is ``5πF0²/(16ω)``.
    """
    _check_omega(omega)
    F0_ref, omega_ref = reference
    _check_omega(omega_ref)
    return F0_ref * math.sqrt(omega / omega_ref)


def model_pulse_check(model, pulse):
    """Reject pulses whose field has components the model cannot see."""
    if pulse is None or model.dim == 3:
        return
    if pulse.dim > 1 and not (isinstance(pulse, Static) and pulse.F[1] == pulse.F[2] == 0.0):
        raise ConfigurationError(
            f"{type(pulse).__name__} is {pulse.dim}-dimensional; {type(model).__name__} is 1-D"
        )
