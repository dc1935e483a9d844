"""Hamiltonian flow on the extended phase space.

Integration uses the Dormand–Prince 5(4) pair with its fourth-order
continuous extension, so every accepted step carries an interpolant that
event finders evaluate directly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import optimize

from ._backend import System
from .errors import ConfigurationError, ConvergenceError, DomainError, IntegrationError
from .phase_space import DEFAULT_U, ExtendedState, quantum_hamiltonian
from .potentials import (
    Coulomb3D,
    Free,
    GaussianWell1D,
    Harmonic,
    Hydrogen3D,
    Lab,
    field_vector,
    model_pulse_check,
)

_AXES = ("1", "2", "3")


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and limits of the adaptive integrator.

    ``max_step`` caps the step so a short pulse cannot be stepped over.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = 1.0
    t_end: float = 150.0
    max_steps: int = 2_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigurationError("integrator tolerances must be positive")
        if not self.max_step > 0:
            raise ConfigurationError(f"max_step must be positive, got {self.max_step}")
        if not math.isfinite(self.t_end):
            raise ConfigurationError("t_end must be finite")


class StateDerivative(NamedTuple):
    """Time derivative of every canonical block."""

    x: np.ndarray
    p: np.ndarray
    s: np.ndarray
    ps: np.ndarray


def make_system(model, pulse=None, frame=None, U=DEFAULT_U, classical=False):
    model_pulse_check(model, pulse)
    return System(model, pulse, frame or Lab(), U, classical)


def eom(state: ExtendedState, model, pulse=None, frame=None) -> StateDerivative:
    """Hamilton's equations at ``state`` (including co-rotating terms)."""
    if state.dim != model.dim:
        raise ConfigurationError(
            f"state has dimension {state.dim} but {type(model).__name__} needs {model.dim}"
        )
    sys = make_system(model, pulse, frame, state.U)
    d = state.dim
    f = sys.rhs(state.t, state.to_vector())
    return StateDerivative(f[:d], f[d:2 * d], f[2 * d:3 * d], f[3 * d:])


# --------------------------------------------------------------------------
# trajectory container
# --------------------------------------------------------------------------

@dataclass(eq=False)
class Trajectory:
    """Accepted steps of one run plus their dense-output interpolants.

    ``t`` is strictly increasing (backward runs are stored reversed) and
    ``y`` holds the flat state ``[x, p, s, ps]`` (or ``[x, p]`` for
    classical runs) at each sample.
    """

    t: np.ndarray
    y: np.ndarray
    coeffs: np.ndarray  # (n_steps, 5, n)
    step_t0: np.ndarray
    step_h: np.ndarray
    system: object = field(repr=False)
    model: object = None
    pulse: object = None
    frame: object = None
    U: np.ndarray | None = None
    classical: bool = False
    terminated_by_event: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for arr in (self.t, self.y, self.coeffs):
            arr.setflags(write=False)

    # layout ---------------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.system.dim

    def _block(self, k):
        d = self.dim
        return self.y[:, k * d:(k + 1) * d]

    @property
    def x(self):
        return self._block(0)

    @property
    def p(self):
        return self._block(1)

    @property
    def s(self):
        if self.classical:
            raise ConfigurationError("classical trajectories carry no fluctuation variables")
        return self._block(2)

    @property
    def ps(self):
        if self.classical:
            raise ConfigurationError("classical trajectories carry no fluctuation variables")
        return self._block(3)

    @property
    def t_start(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    def __len__(self):
        return self.t.size

    # dense output ---------------------------------------------------------
    def _step_index(self, t):
        i = np.searchsorted(self.t, t, side="right") - 1
        return np.clip(i, 0, self.t.size - 2)

    def __call__(self, t):
        """Interpolated state vector(s) at ``t``."""
        t_arr = np.asarray(t, dtype=float)
        flat = t_arr.reshape(-1)
        if np.any(flat < self.t[0] - 1e-12) or np.any(flat > self.t[-1] + 1e-12):
            raise DomainError(f"t outside trajectory span [{self.t[0]}, {self.t[-1]}]")
        if self.t.size == 1:
            out = np.broadcast_to(self.y[0], flat.shape + self.y.shape[1:]).copy()
        else:
            idx = self._step_index(flat)
            th = (flat - self.step_t0[idx]) / self.step_h[idx]
            th1 = 1.0 - th
            c = self.coeffs[idx]
            th_, th1_ = th[:, None], th1[:, None]
            out = c[:, 0] + th_ * (c[:, 1] + th1_ * (c[:, 2] + th_ * (c[:, 3] + th1_ * c[:, 4])))
        return out[0] if t_arr.ndim == 0 else out.reshape(t_arr.shape + self.y.shape[1:])

    def state_at(self, t) -> ExtendedState:
        if self.classical:
            raise ConfigurationError("classical trajectories carry no fluctuation variables")
        return ExtendedState.from_vector(self(t), self.U, t=float(t))

    # derived channels -----------------------------------------------------
    def _channel(self, name, fn):
        if name not in self._cache:
            vals = np.array([fn(ti, yi) for ti, yi in zip(self.t, self.y)])
            vals.setflags(write=False)
            self._cache[name] = vals
        return self._cache[name]

    @property
    def HQ(self):
        """Hamiltonian (frame field, frame coupling included) per sample."""
        return self._channel("HQ", self.system.hamiltonian)

    @property
    def E_nofield(self):
        """Energy with the field interaction removed, per sample."""
        return self._channel("E_nofield", self.system.free_energy)

    @property
    def field(self):
        """Field seen by the system (frame components) per sample, ``(n, 3)``."""
        if "field" not in self._cache:
            F = np.array([self.system.field(ti) for ti in self.t]).reshape(self.t.size, -1)
            out = np.zeros((self.t.size, 3))
            out[:, : F.shape[1]] = F[:, :3]
            out.setflags(write=False)
            self._cache["field"] = out
        return self._cache["field"]

    def uncertainty_products(self):
        """Reconstructed ``Δxx·Δpp − Δxp²`` per sample and axis."""
        s, ps = self.s, self.ps
        dxx, dxp, dpp = s * s, s * ps, ps * ps + self.U / (s * s)
        return dxx * dpp - dxp * dxp

    # events ---------------------------------------------------------------
    def find_roots(
        self,
        g: Callable[[float, np.ndarray], float],
        t_min: float | None = None,
        t_max: float | None = None,
        direction: int = 0,
        subdivisions: int = 4,
        xtol: float = 1e-12,
    ) -> list[float]:
        """Zeros of ``g(t, y(t))`` on the dense output, in time order.

        ``direction`` selects upward (+1), downward (−1) or any crossing.
        Each step is sampled at ``subdivisions`` interior points before
        bracketing, and brackets are polished with Brent's method.
        """
        t_min = self.t[0] if t_min is None else max(t_min, self.t[0])
        t_max = self.t[-1] if t_max is None else min(t_max, self.t[-1])
        if t_max <= t_min:
            return []
        inner = self.t[(self.t > t_min) & (self.t < t_max)]
        knots = np.concatenate([[t_min], inner, [t_max]])
        frac = np.arange(subdivisions) / subdivisions
        grid = np.concatenate([(knots[:-1, None] + frac * np.diff(knots)[:, None]).ravel(), [t_max]])
        ys = self(grid)
        vals = np.array([g(ti, yi) for ti, yi in zip(grid, ys)])
        roots = []
        if vals[0] == 0.0 and (direction == 0 or np.sign(vals[1]) == direction):
            roots.append(float(grid[0]))
        for i in range(grid.size - 1):
            a, b = vals[i], vals[i + 1]
            if a == 0.0 or a * b > 0:
                continue
            if direction and np.sign(b - a) != direction:
                continue
            if b == 0.0:
                roots.append(float(grid[i + 1]))
                continue
            r = optimize.brentq(
                lambda tt: g(tt, self(tt)), grid[i], grid[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps
            )
            roots.append(float(r))
        return roots

    # output ---------------------------------------------------------------
    def column_names(self):
        d = self.dim
        axes = _AXES[:d]
        cols = ["t"] + [f"x{a}" for a in axes] + [f"p{a}" for a in axes]
        if not self.classical:
            cols += [f"s{a}" for a in axes] + [f"ps{a}" for a in axes]
        return cols + ["HQ", "E_nofield", "Fx", "Fy", "Fz"]

    def rows(self):
        HQ, E0, F = self.HQ, self.E_nofield, self.field
        for i in range(self.t.size):
            yield [self.t[i], *self.y[i], HQ[i], E0[i], *F[i]]

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.column_names())
            for row in self.rows():
                w.writerow([repr(float(v)) for v in row])


# --------------------------------------------------------------------------
# integrator
# --------------------------------------------------------------------------

def _initial_step(sys, t0, y0, f0, direction, cfg):
    """Starting step from the Hairer–Wanner heuristic."""
    scale = cfg.abs_tol + cfg.rel_tol * np.abs(y0)
    d0 = math.sqrt(float(np.mean((y0 / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, cfg.max_step)
    y1 = y0 + direction * h0 * f0
    f1 = sys.rhs(t0 + direction * h0, y1)
    d2 = math.sqrt(float(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, cfg.max_step)


def _stops(pulse, t0, t1):
    if pulse is None:
        return []
    lo, hi = min(t0, t1), max(t0, t1)
    pts = [v for v in pulse.support() if math.isfinite(v) and lo < v < hi]
    return sorted(pts, reverse=t1 < t0)


def _run(sys, t0, y0, t_end, cfg, stop=None, meta=None):
    direction = 1.0 if t_end >= t0 else -1.0
    meta = meta or {}
    ts, ys, cs, st0, sh = [t0], [y0.copy()], [], [], []
    t, y = t0, y0.copy()
    f = sys.rhs(t, y)
    stops = _stops(meta.get("pulse"), t0, t_end) + [t_end]
    h = _initial_step(sys, t, y, f, direction, cfg) if t_end != t0 else 0.0
    steps = 0
    event = False
    safety, fac_min, fac_max = 0.9, 0.2, 10.0

    def build(partial_ok=True):
        ts_a, ys_a = np.array(ts), np.array(ys)
        cs_a = np.array(cs).reshape(-1, 5, y0.size)
        t0_a, h_a = np.array(st0), np.array(sh)
        if direction < 0:
            ts_a, ys_a = ts_a[::-1].copy(), ys_a[::-1].copy()
            cs_a, t0_a, h_a = cs_a[::-1].copy(), t0_a[::-1].copy(), h_a[::-1].copy()
        return Trajectory(
            t=ts_a, y=ys_a, coeffs=cs_a, step_t0=t0_a, step_h=h_a, system=sys,
            terminated_by_event=event, **meta,
        )

    for target in stops:
        while direction * (target - t) > 0:
            if steps >= cfg.max_steps:
                raise IntegrationError("maximum number of steps exceeded", t, y, build())
            h = min(h, cfg.max_step, abs(target - t))
            last = abs(target - t) - h <= 1e-12 * max(1.0, abs(t))
            if last:
                h = abs(target - t)
            y_new, f_new, err, dense = sys.step(t, y, f, direction * h, cfg.rel_tol, cfg.abs_tol)
            steps += 1
            if not err <= 1.0:
                fac = fac_min if not math.isfinite(err) else max(fac_min, safety * err ** -0.2)
                h *= fac
                if h < 1e-14 * max(1.0, abs(t)):
                    raise IntegrationError(
                        f"step size underflow at t={t!r} (singular or stiff region)", t, y, build()
                    )
                continue
            hs = direction * h
            t_new = target if last else t + hs
            rc2 = y_new - y
            rc3 = hs * f - rc2
            cs.append(np.stack([y, rc2, rc3, rc2 - hs * f_new - rc3, dense]))
            st0.append(t)
            sh.append(t_new - t)
            t, y, f = t_new, y_new, f_new
            ts.append(t)
            ys.append(y.copy())
            fac = fac_max if err == 0 else min(fac_max, max(fac_min, safety * err ** -0.2))
            h *= fac
            if stop is not None and stop(t, y):
                event = True
                return build()
    return build()


def integrate(
    state0: ExtendedState,
    model,
    pulse=None,
    frame=None,
    cfg: IntegratorConfig | None = None,
    stop: Optional[Callable[[float, np.ndarray], bool]] = None,
) -> Trajectory:
    """Integrate the quantum flow from ``state0`` to ``cfg.t_end``.

    ``stop(t, y)`` is checked after every accepted step and ends the run
    early when it returns true.  Backward runs (``t_end < state0.t``) are
    allowed.  A step-size collapse raises :class:`IntegrationError` with
    the trajectory integrated so far.
    """
    cfg = cfg or IntegratorConfig()
    if state0.dim != model.dim:
        raise ConfigurationError(
            f"state has dimension {state0.dim} but {type(model).__name__} needs {model.dim}"
        )
    frame = frame or Lab()
    sys = make_system(model, pulse, frame, state0.U)
    meta = dict(model=model, pulse=pulse, frame=frame, U=np.array(state0.U), classical=False)
    return _run(sys, state0.t, state0.to_vector(), float(cfg.t_end), cfg, stop, meta)


def classical_backpropagate(
    x_f,
    p_f,
    t_f: float = 150.0,
    t0: float = 0.0,
    model=None,
    pulse=None,
    frame=None,
    cfg: IntegratorConfig | None = None,
) -> Trajectory:
    """Integrate ``ẋ = p, ṗ = −∇V`` backward from ``(x_f, p_f)`` at ``t_f``."""
    if not t_f > t0:
        raise ConfigurationError(f"need t_f > t0, got t_f={t_f}, t0={t0}")
    model = model or Free()
    x_f = np.atleast_1d(np.asarray(x_f, dtype=float))
    p_f = np.atleast_1d(np.asarray(p_f, dtype=float))
    if x_f.size != model.dim or p_f.size != model.dim:
        raise ConfigurationError(f"final point must have {model.dim} components")
    cfg = cfg or IntegratorConfig()
    frame = frame or Lab()
    sys = make_system(model, pulse, frame, DEFAULT_U, classical=True)
    meta = dict(model=model, pulse=pulse, frame=frame, U=None, classical=True)
    return _run(sys, float(t_f), np.concatenate([x_f, p_f]), float(t0), cfg, None, meta)


def integrate_classical(x0, p0, t0, t1, model, pulse=None, frame=None, cfg=None) -> Trajectory:
    """Classical flow from ``(x0, p0)`` at ``t0`` to ``t1`` (either direction)."""
    cfg = cfg or IntegratorConfig()
    frame = frame or Lab()
    y0 = np.concatenate([np.atleast_1d(x0), np.atleast_1d(p0)]).astype(float)
    sys = make_system(model, pulse, frame, DEFAULT_U, classical=True)
    meta = dict(model=model, pulse=pulse, frame=frame, U=None, classical=True)
    return _run(sys, float(t0), y0, float(t1), cfg, None, meta)


# --------------------------------------------------------------------------
# ground state
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GroundState:
    """Minimizer of the field-free quantum energy with its energy."""

    state: ExtendedState
    energy: float
    method: str

    def __getattr__(self, name):
        # x, p, s, ps, U, dim, to_vector ... come from the state
        if name.startswith("__"):
            raise AttributeError(name)
        return getattr(self.state, name)


def _state(dim, s, U):
    z = np.zeros(dim)
    return ExtendedState(x=z, p=z, s=np.broadcast_to(s, (dim,)), ps=z, U=U)


def _coulomb_width(U, eps):
    """Isotropic minimum of ``3U/(2s²) − 1/√(3s² + ε²)``."""
    s_star = 3.0 * math.sqrt(3.0) * U
    dE = lambda s: -3.0 * U / s ** 3 + 3.0 * s / (3.0 * s * s + eps * eps) ** 1.5
    if eps == 0.0:
        return s_star
    return optimize.brentq(dE, 0.5 * s_star, 2.0 * s_star, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _gaussian_width(D, U):
    """Smaller root of ``2 D s⁴ e^{−s²} = U`` (the local minimum of V_eff)."""
    g = lambda s: 2.0 * D * s ** 4 * math.exp(-s * s) - U
    if not g(math.sqrt(2.0)) > 0:
        raise ConvergenceError(
            f"Gaussian well of depth {D} has no bound minimum for U={U} "
            f"(need D > {U * math.e ** 2 / 8:.6g})",
            diagnostics={"depth": D, "U": U},
        )
    return optimize.brentq(g, 1e-8, math.sqrt(2.0), xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _minimize_general(model, U):
    from .effective import AllOrders, grad_v_eff, v_eff

    d = model.dim
    U_arr = np.broadcast_to(np.asarray(U, dtype=float), (d,))

    def fun(z):
        x, s = z[:d], z[d:]
        gx, gs = grad_v_eff(AllOrders, model, x, s, U_arr)
        return float(v_eff(model, x, s, U_arr)), np.concatenate([gx, gs])

    z0 = np.concatenate([np.zeros(d), np.ones(d)])
    bounds = [(None, None)] * d + [(1e-6, None)] * d
    res = optimize.minimize(fun, z0, jac=True, method="L-BFGS-B", bounds=bounds,
                            options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 10_000})
    if not res.success or np.any(res.x[d:] <= 1.1e-6):
        raise ConvergenceError(
            f"ground-state minimization failed: {res.message}",
            diagnostics={"x": res.x.tolist(), "fun": float(res.fun), "nit": int(res.nit)},
        )
    return res.x[:d], res.x[d:]


def ground_state_init(model, U=DEFAULT_U) -> GroundState:
    """Field-free energy minimum with all momenta zero.

    Coulomb-type and Gaussian wells use their one-dimensional reductions;
    anything else falls back to bounded quasi-Newton descent from
    ``x = 0, s = 1``.
    """
    U_arr = np.broadcast_to(np.asarray(U, dtype=float), (model.dim,))
    if np.any(U_arr <= 0):
        raise DomainError(f"U must be positive, got {U}")
    isotropic = np.all(U_arr == U_arr[0])
    u = float(U_arr[0])
    if isinstance(model, (Coulomb3D, Hydrogen3D)) and isotropic:
        state, method = _state(3, _coulomb_width(u, model.softening), u), "coulomb-closed-form"
    elif isinstance(model, GaussianWell1D):
        state, method = _state(1, _gaussian_width(model.depth, u), u), "gaussian-root"
    elif isinstance(model, Harmonic) and isotropic:
        state, method = _state(model.dim, (u / model.k) ** 0.25, u), "harmonic-closed-form"
    elif isinstance(model, Free):
        raise ConvergenceError("a free particle has no ground state", diagnostics={"model": "free"})
    else:
        x, s = _minimize_general(model, U_arr)
        z = np.zeros(model.dim)
        state, method = ExtendedState(x=x, p=z, s=s, ps=z, U=U_arr), "l-bfgs-b"
    return GroundState(state, quantum_hamiltonian(state, model), method)


def calibrate_well_depth(target_E: float, U=DEFAULT_U, tol: float = 1e-10) -> float:
    """Gaussian depth ``D`` whose ground-state energy equals ``target_E``."""
    if not target_E < 0:
        raise DomainError(f"target energy must be negative, got {target_E}")
    U = float(U)
    energy = lambda D: ground_state_init(GaussianWell1D(D), U).energy - target_E
    lo = U * math.e ** 2 / 8.0 * (1.0 + 1e-9)
    hi = 2.0 * lo
    while energy(hi) > 0:
        hi *= 2.0
        if hi > 1e8:
            raise ConvergenceError(
                f"no depth below 1e8 reaches E={target_E}", diagnostics={"target_E": target_E, "U": U}
            )
    if not energy(lo) > 0:
        raise ConvergenceError("target energy is not bracketed", diagnostics={"target_E": target_E})
    D = optimize.brentq(energy, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(energy(D)) > tol:
        raise ConvergenceError(
            f"calibration residual {energy(D):.3g} exceeds {tol}", diagnostics={"depth": D}
        )
    return D


def field_along_trajectory(traj: Trajectory, t):
    """Lab-frame field at ``t`` (convenience for analysis)."""
    return field_vector(traj.pulse, t)
