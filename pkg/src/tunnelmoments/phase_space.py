"""Extended phase space: expectation values plus canonical fluctuation pairs.

Each axis carries ``(x, p, s, p_s)`` where ``s`` is the position spread and
``p_s`` its conjugate momentum.  The second-order moments follow from

    Δ(x²) = s²,   Δ(xp) = s p_s,   Δ(p²) = p_s² + U / s²

with ``U`` a per-axis constant of motion.  Atomic units, m = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, DomainError

#: Minimum-uncertainty value ħ²/4 in atomic units.
DEFAULT_U = 0.25


@dataclass(frozen=True)
class AxisState:
    x: float
    p: float
    s: float
    p_s: float

    def __post_init__(self):
        if not self.s > 0:
            raise DomainError(f"fluctuation coordinate must be positive, got s={self.s}")


@dataclass(frozen=True)
class MomentSet:
    """Second-order central moments of one axis."""

    dxx: float
    dxp: float
    dpp: float

    @property
    def uncertainty(self) -> float:
        return self.dxx * self.dpp - self.dxp * self.dxp


def _frozen(values, name):
    arr = np.array(values, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ExtendedState:
    """Point of the extended phase space at time ``t``.

    ``x, p, s, ps`` and ``U`` are read-only arrays of length 1 or 3.
    """

    x: np.ndarray
    p: np.ndarray
    s: np.ndarray
    ps: np.ndarray
    U: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        arrays = {}
        for name in ("x", "p", "s", "ps"):
            arrays[name] = _frozen(getattr(self, name), name)
        U = np.array(self.U, dtype=float).reshape(-1)
        dim = arrays["x"].size
        if dim not in (1, 3):
            raise ConfigurationError(f"state dimension must be 1 or 3, got {dim}")
        if U.size == 1:
            U = np.full(dim, U[0])
        arrays["U"] = _frozen(U, "U")
        for name, arr in arrays.items():
            if arr.size != dim:
                raise ConfigurationError(f"{name} has {arr.size} entries, expected {dim}")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "t", float(self.t))
        if np.any(arrays["s"] <= 0):
            raise DomainError(f"fluctuation coordinates must be positive, got s={arrays['s']}")
        if np.any(arrays["U"] <= 0):
            raise DomainError(f"uncertainty parameter must be positive, got U={arrays['U']}")

    @property
    def dim(self) -> int:
        return self.x.size

    @property
    def axes(self) -> tuple[AxisState, ...]:
        return tuple(AxisState(*map(float, v)) for v in zip(self.x, self.p, self.s, self.ps))

    @classmethod
    def from_axes(cls, axes: Sequence[AxisState], U=DEFAULT_U, t: float = 0.0) -> "ExtendedState":
        return cls(
            x=[a.x for a in axes],
            p=[a.p for a in axes],
            s=[a.s for a in axes],
            ps=[a.p_s for a in axes],
            U=U,
            t=t,
        )

    def to_vector(self) -> np.ndarray:
        """Flat layout ``[x..., p..., s..., ps...]`` used by the integrator."""
        return np.concatenate([self.x, self.p, self.s, self.ps])

    @classmethod
    def from_vector(cls, y, U, t: float = 0.0) -> "ExtendedState":
        y = np.asarray(y, dtype=float)
        if y.size % 4:
            raise ConfigurationError(f"state vector length {y.size} is not a multiple of 4")
        d = y.size // 4
        return cls(x=y[:d], p=y[d:2 * d], s=y[2 * d:3 * d], ps=y[3 * d:], U=U, t=t)

    def moments(self) -> tuple[MomentSet, ...]:
        return tuple(
            moments_from_canonical(s, ps, u) for s, ps, u in zip(self.s, self.ps, self.U)
        )

    def replace(self, **changes) -> "ExtendedState":
        fields = dict(x=self.x, p=self.p, s=self.s, ps=self.ps, U=self.U, t=self.t)
        fields.update(changes)
        return ExtendedState(**fields)


def moments_from_canonical(s: float, p_s: float, U: float) -> MomentSet:
    """Map ``(s, p_s, U)`` to ``(Δ(x²), Δ(xp), Δ(p²))``."""
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    if U < 0:
        raise DomainError(f"U must be non-negative, got {U}")
    return MomentSet(s * s, s * p_s, p_s * p_s + U / (s * s))


def canonical_from_moments(m: MomentSet) -> tuple[float, float, float]:
    """Inverse of :func:`moments_from_canonical`; returns ``(s, p_s, U)``.

    ``U = 0`` (a pure classical point) is accepted, matching the forward map.
    """
    if not m.dxx > 0:
        raise DomainError(f"position variance must be positive, got {m.dxx}")
    U = m.dxx * m.dpp - m.dxp * m.dxp
    if U < 0:
        raise DomainError(f"moments violate the uncertainty relation (U={U})")
    s = math.sqrt(m.dxx)
    return s, m.dxp / s, U


def quantum_hamiltonian(state: ExtendedState, model, pulse=None, frame=None) -> float:
    """Quantum Hamiltonian ``Σ(p² + p_s²)/2 + V_eff`` at ``state.t``.

    In a co-rotating frame the coupling ``rate·(p₁x₂ − p₂x₁)`` is added and
    the field is the frame-transformed one.
    """
    from .effective import v_eff
    from .potentials import Lab, frame_field

    if state.dim != model.dim:
        raise ConfigurationError(
            f"state has dimension {state.dim} but {type(model).__name__} needs {model.dim}"
        )
    frame = frame or Lab()
    F = frame_field(pulse, frame, state.t)
    kinetic = 0.5 * float(np.sum(state.p ** 2 + state.ps ** 2))
    energy = kinetic + v_eff(model, state.x, state.s, state.U, F)
    rate = getattr(frame, "rate", 0.0)
    if rate and state.dim >= 2:
        energy += rate * (state.p[0] * state.x[1] - state.p[1] * state.x[0])
    return float(energy)
