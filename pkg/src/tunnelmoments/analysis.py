"""Tunnelling-time criteria and observables derived from trajectories.

Every criterion returns a :class:`CriterionResult`; absence of an exit is a
result (``found=False``), not an exception.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate as spi
from scipy import optimize, signal

from .dynamics import (
    IntegratorConfig,
    Trajectory,
    classical_backpropagate,
    ground_state_init,
    integrate,
)
from .effective import v_eff
from .errors import ConfigurationError, DomainError
from .phase_space import DEFAULT_U
from .potentials import (
    HalfCycleSin3,
    Lab,
    field_vector,
    fluence_matched_amplitude,
    peak_time,
)

CRITERIA = (
    "energy",
    "momentum_backprop",
    "static_traversal",
    "wkb_integral",
    "fluct_fit",
    "fluct_inflection",
)


@dataclass
class CriterionResult:
    """Exit time found by one criterion, relative to the field maximum."""

    criterion: str
    tau_exit: Optional[float]
    tau_max: float
    found: bool
    exit_position: Optional[np.ndarray] = None
    exit_momentum: Optional[np.ndarray] = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ConfigurationError(f"unknown criterion {self.criterion!r}")
        if self.found and self.tau_exit is None:
            raise ConfigurationError("a found result needs tau_exit")

    @property
    def tau_ionization(self) -> Optional[float]:
        return self.tau_exit - self.tau_max if self.found else None


def _not_found(criterion, tau_max, **extras):
    return CriterionResult(criterion, None, tau_max, False, extras=extras)


def _tau_max(pulse):
    return peak_time(pulse) if pulse is not None else 0.0


# --------------------------------------------------------------------------
# energy criterion
# --------------------------------------------------------------------------

def exit_time_energy(traj: Trajectory, model=None, pulse=None, t_min: float | None = None):
    """First upward zero of the field-free energy ``H_Q − x·F``.

    The search starts at ``t_min`` (default: start of the trajectory, i.e.
    ``t = 0`` for pulses switched on at the origin).
    """
    pulse = traj.pulse if pulse is None else pulse
    tau_max = _tau_max(pulse)
    energy = traj.system.free_energy
    roots = traj.find_roots(energy, t_min=t_min, direction=+1)
    if not roots:
        return _not_found("energy", tau_max, E_final=float(traj.E_nofield[-1]))
    t_ex = roots[0]
    y = traj(t_ex)
    d = traj.dim
    return CriterionResult(
        "energy", t_ex, tau_max, True, y[:d].copy(), y[d:2 * d].copy(),
        extras={"n_crossings": len(roots)},
    )


# --------------------------------------------------------------------------
# classical back-propagation
# --------------------------------------------------------------------------

def longitudinal_momentum(pulse, t, x, p):
    """Momentum along the instantaneous field axis (the single axis in 1-D)."""
    if p.size == 1:
        return float(p[0])
    E = field_vector(pulse, t)[: p.size]
    n = float(np.linalg.norm(E))
    return float(p @ E) / n if n > 0 else math.nan


def exit_time_momentum_backprop(
    traj: Trajectory, model=None, pulse=None, t_f: float = 150.0, cfg: IntegratorConfig | None = None
):
    """Zero of the longitudinal momentum on the classical back-propagated path.

    Among several zeros the one closest to the origin is returned; the
    back-propagated trajectory is kept in ``extras["backprop"]``.
    """
    model = traj.model if model is None else model
    pulse = traj.pulse if pulse is None else pulse
    tau_max = _tau_max(pulse)
    if traj.t_end < t_f - 1e-9:
        raise DomainError(f"trajectory ends at {traj.t_end}, before t_f={t_f}")
    d = traj.dim
    y_f = traj(t_f)
    back = classical_backpropagate(
        y_f[:d], y_f[d:2 * d], t_f, traj.t_start, model, pulse, traj.frame, cfg
    )
    g = lambda t, y: longitudinal_momentum(pulse, t, y[:d], y[d:])
    if d > 1:
        # the field axis is undefined where the field vanishes
        lo, hi = pulse.support()
        roots = back.find_roots(g, t_min=max(lo, back.t_start) + 1e-9, t_max=min(hi, back.t_end) - 1e-9)
    else:
        roots = back.find_roots(g)
    if not roots:
        return _not_found("momentum_backprop", tau_max, backprop=back)
    dist = [float(np.linalg.norm(back(t)[:d])) for t in roots]
    k = int(np.argmin(dist))
    t_ex = roots[k]
    y = back(t_ex)
    return CriterionResult(
        "momentum_backprop", t_ex, tau_max, True, y[:d].copy(), y[d:].copy(),
        extras={"backprop": back, "all_zeros": roots},
    )


def backprop_deviation(traj: Trajectory, back: Trajectory, n: int = 2001):
    """Position gap between quantum and back-propagated classical paths.

    Returns ``(t, absolute_gap, relative_gap)`` on a uniform grid over the
    overlap of both trajectories.
    """
    d = traj.dim
    lo, hi = max(traj.t_start, back.t_start), min(traj.t_end, back.t_end)
    t = np.linspace(lo, hi, n)
    xq = traj(t)[:, :d]
    xb = back(t)[:, :d]
    gap = np.linalg.norm(xb - xq, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = gap / np.linalg.norm(xq, axis=1)
    return t, gap, rel


# --------------------------------------------------------------------------
# static field: traversal time and WKB-like integral
# --------------------------------------------------------------------------

def _static_axis(model, F):
    F = np.asarray(F, dtype=float).reshape(-1)
    F3 = np.zeros(3)
    F3[: F.size] = F
    axis = int(np.argmax(np.abs(F3)))
    if F3[axis] == 0 or np.count_nonzero(F3) != 1:
        raise ConfigurationError("static field must point along one coordinate axis")
    # downhill direction of the field term
    probe = np.zeros(model.dim)
    probe[axis] = 50.0
    sign = 1.0 if model.value(probe, F3) < model.value(-probe, F3) else -1.0
    return F3, axis, sign


def _radicand(model, F3, E_bound, s0, U, axis, sign):
    s0 = np.broadcast_to(np.asarray(s0, dtype=float), (model.dim,))

    def R(xa, sa):
        xa, sa = np.broadcast_arrays(np.asarray(xa, dtype=float), np.asarray(sa, dtype=float))
        x = np.zeros(xa.shape + (model.dim,))
        s = np.empty(xa.shape + (model.dim,))
        s[...] = s0
        x[..., axis] = sign * xa
        s[..., axis] = sa
        out = -E_bound - v_eff(model, x, s, U, F3)
        return float(out) if np.ndim(out) == 0 else out

    return R


def tunnel_exit_position(model, F_static, E0: float, frozen_s=None, U=DEFAULT_U, x_max=None):
    """Outer turning point ``x*`` along the field axis.

    ``x*`` is the last root of ``−E0 − V_eff`` with every width frozen at
    its ground-state value; ``E0`` is the ionization potential (> 0).
    Raises :class:`DomainError` when the field leaves no barrier.
    """
    F3, axis, sign = _static_axis(model, F_static)
    s0 = ground_state_init(model, U).s if frozen_s is None else frozen_s
    s_ax = float(np.broadcast_to(s0, (model.dim,))[axis])
    R = _radicand(model, F3, E0, s0, U, axis, sign)
    x_max = x_max or max(200.0, 20.0 / abs(F3[axis]))
    xs = np.linspace(0.05, x_max, 20001)
    r = R(xs, s_ax)
    up = np.nonzero((r[:-1] < 0) & (r[1:] >= 0))[0]
    if not np.any(r < 0):
        raise DomainError("no barrier: the frozen-width radicand is non-negative everywhere")
    if up.size == 0:
        raise DomainError(f"no outer turning point below x={x_max}")
    i = up[-1]
    return optimize.brentq(lambda x: R(x, s_ax), xs[i], xs[i + 1], xtol=1e-13)


def wkb_like_time(
    model, F_static, E0: float, frozen_s=None, U=DEFAULT_U, kinetic_factor_two: bool = False, tol=1e-8
):
    """``∫₀^{x*} dx / p(x)`` with ``p = √(−E0 − V_eff)`` along the widening path.

    The path keeps the transverse widths at their ground-state values and
    sets the longitudinal width to ``max(x, s⁰)``.  With
    ``kinetic_factor_two`` the momentum is ``√(2(−E0 − V_eff))``.
    """
    F3, axis, sign = _static_axis(model, F_static)
    s0 = ground_state_init(model, U).s if frozen_s is None else frozen_s
    s_ax = float(np.broadcast_to(s0, (model.dim,))[axis])
    x_star = tunnel_exit_position(model, F_static, E0, s0, U)
    R = _radicand(model, F3, E0, s0, U, axis, sign)
    k = 2.0 if kinetic_factor_two else 1.0
    path = lambda x: R(x, max(x, s_ax))
    xs = np.linspace(1e-6, x_star, 2001)
    check = R(xs, np.maximum(xs, s_ax))
    if np.any(check <= 0):
        raise DomainError("radicand is not positive along the integration path")
    # x = u² removes the inverse-square-root endpoint singularity at 0
    integrand = lambda u: 2.0 * u / math.sqrt(k * path(u * u)) if u > 0 else 0.0
    pts = [math.sqrt(s_ax)] if s_ax < x_star else None
    val, _ = spi.quad(integrand, 0.0, math.sqrt(x_star), points=pts, limit=400, epsabs=0.0, epsrel=tol)
    return val


def static_traversal(traj: Trajectory, model=None, F_static=None, E0: float = 2.0 / 9.0, frozen_s=None):
    """Time from the initial rest point to the outer turning point ``x*``.

    ``E0`` is the ionization potential.  The longitudinal momentum at the
    exit is stored in ``exit_momentum`` and ``extras["p_exit"]``.
    """
    model = traj.model if model is None else model
    if F_static is None:
        F_static = traj.pulse.F
    try:
        x_star = tunnel_exit_position(model, F_static, E0, frozen_s, traj.U)
        _, axis, sign = _static_axis(model, F_static)
    except DomainError as exc:
        return _not_found("static_traversal", traj.t_start, diagnostic=str(exc))
    d = traj.dim
    roots = traj.find_roots(lambda t, y: sign * y[axis] - x_star, direction=+1)
    if not roots:
        return _not_found("static_traversal", traj.t_start, x_star=x_star,
                          diagnostic="exit not reached within the trajectory")
    t_ex = roots[0]
    y = traj(t_ex)
    return CriterionResult(
        "static_traversal", t_ex, traj.t_start, True, y[:d].copy(), y[d:2 * d].copy(),
        extras={"x_star": x_star, "p_exit": float(sign * y[d + axis]), "traversal_time": t_ex - traj.t_start},
    )


# --------------------------------------------------------------------------
# angles, spot size and transverse fluctuation
# --------------------------------------------------------------------------

@dataclass
class OffsetAngle:
    t: np.ndarray
    theta: np.ndarray  # radians, unwrapped, NaN where |r| < 1e-6
    final: float
    t_final: float


def _unwrap_with_gaps(theta):
    out = np.full_like(theta, np.nan)
    ok = np.isfinite(theta)
    out[ok] = np.unwrap(theta[ok])
    return out


def offset_angle(traj: Trajectory, t=None, detection_radius: float | None = 1000.0) -> OffsetAngle:
    """Planar polar angle of ``⟨r⟩``, unwrapped.

    The final angle is taken at the first crossing of ``detection_radius``
    (or at the last sample if the radius is never reached).
    """
    if traj.dim < 2:
        raise ConfigurationError("offset angle needs a planar component")
    t = traj.t if t is None else np.asarray(t, dtype=float)
    x = traj(t)[:, :2]
    r = np.hypot(x[:, 0], x[:, 1])
    theta = np.where(r >= 1e-6, np.arctan2(x[:, 1], x[:, 0]), np.nan)
    theta = _unwrap_with_gaps(theta)
    t_fin = traj.t_end
    if detection_radius is not None:
        hit = detection_time(traj, detection_radius)
        if hit is not None:
            t_fin = hit
    # unwrap consistently up to the final instant
    grid = np.union1d(traj.t[traj.t <= t_fin], [t_fin])
    xg = traj(grid)[:, :2]
    th = np.arctan2(xg[:, 1], xg[:, 0])
    th = _unwrap_with_gaps(np.where(np.hypot(xg[:, 0], xg[:, 1]) >= 1e-6, th, np.nan))
    finite = th[np.isfinite(th)]
    final = float(finite[-1]) if finite.size else math.nan
    return OffsetAngle(t, theta, final, float(t_fin))


def detection_time(traj: Trajectory, radius: float) -> Optional[float]:
    d = traj.dim
    roots = traj.find_roots(lambda t, y: float(np.linalg.norm(y[:d])) - radius, direction=+1)
    return roots[0] if roots else None


def detection_stop(radius: float, dim: int):
    """``stop`` callback for :func:`integrate` ending the run past ``radius``."""
    return lambda t, y: float(np.linalg.norm(y[:dim])) >= radius


def transverse_basis(r):
    """Unit vectors ``e_a = ẑ × r̂`` and ``e_b = r̂ × e_a``."""
    r = np.asarray(r, dtype=float)
    rh = r / np.linalg.norm(r)
    ea = np.cross([0.0, 0.0, 1.0], rh)
    if np.linalg.norm(ea) < 1e-12:
        ea = np.array([1.0, 0.0, 0.0])
    ea /= np.linalg.norm(ea)
    return ea, np.cross(rh, ea)


@dataclass
class SpotSize:
    spot: float
    t_detect: Optional[float]
    found: bool


def spot_size(traj: Trajectory, detection_radius: float = 1000.0) -> SpotSize:
    """Geometric mean of the two widths transverse to ``⟨r⟩`` at the detector."""
    if traj.dim != 3:
        raise ConfigurationError("spot size needs a 3-D trajectory")
    t_hit = detection_time(traj, detection_radius)
    if t_hit is None:
        return SpotSize(math.nan, None, False)
    y = traj(t_hit)
    s = y[6:9]
    ea, eb = transverse_basis(y[:3])
    sa = math.sqrt(float(ea ** 2 @ s ** 2))
    sb = math.sqrt(float(eb ** 2 @ s ** 2))
    return SpotSize(math.sqrt(sa * sb), t_hit, True)


@dataclass
class FluctuationSeries:
    """Transverse fluctuation on a uniform grid and its smoothed curvature."""

    t: np.ndarray
    sT: np.ndarray
    d2: np.ndarray
    window: float = 0.0
    tau_max: float = 0.0
    epoch: tuple = (0.0, 0.0)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.sT = np.asarray(self.sT, dtype=float)
        self.d2 = np.asarray(self.d2, dtype=float)
        if not (self.t.shape == self.sT.shape == self.d2.shape):
            raise ConfigurationError("series arrays must have the same length")
        if np.any(np.diff(self.t) <= 0):
            raise ConfigurationError("t must be strictly increasing")

    @property
    def dt(self):
        return float(self.t[1] - self.t[0])


def s_transverse(theta, sx, sy):
    return np.sqrt(np.cos(theta) ** 2 * sx ** 2 + np.sin(theta) ** 2 * sy ** 2)


def _fill_gaps(theta):
    theta = np.array(theta, dtype=float)
    ok = np.isfinite(theta)
    if not ok.any():
        return np.zeros_like(theta)
    idx = np.where(ok, np.arange(theta.size), 0)
    np.maximum.accumulate(idx, out=idx)
    first = int(np.argmax(ok))
    idx[:first] = first
    return theta[idx]


def smoothed_second_derivative(y, dt, window_time, order=3, deriv=2):
    n = max(int(round(window_time / dt)) | 1, order + 2 | 1)
    return signal.savgol_filter(y, n, order, deriv=deriv, delta=dt, mode="interp")


def transverse_fluctuation(
    traj: Trajectory, dt: float = 0.05, t_max: float | None = None, window: float | None = None
) -> FluctuationSeries:
    """``s_T = √(cos²θ s_x² + sin²θ s_y²)`` with θ the offset angle.

    Where θ is undefined (``|r| < 1e-6``) the nearest earlier defined angle
    is used, and 0 before the first one.  The second derivative uses a
    cubic Savitzky–Golay filter over ``window`` (default 5 % of the pulse
    duration).
    """
    if traj.dim < 2:
        raise ConfigurationError("transverse fluctuation is undefined for 1-D trajectories")
    t_max = traj.t_end if t_max is None else min(t_max, traj.t_end)
    n = int(math.floor((t_max - traj.t_start) / dt + 1e-9)) + 1
    t = traj.t_start + dt * np.arange(n)
    th = _fill_gaps(offset_angle(traj, t, detection_radius=None).theta)
    Y = traj(t)
    d = traj.dim
    sT = s_transverse(th, Y[:, 2 * d], Y[:, 2 * d + 1])
    pulse = traj.pulse
    if pulse is not None:
        lo, hi = pulse.support()
        duration = hi - lo if math.isfinite(hi - lo) else t_max - traj.t_start
        epoch = (max(lo, traj.t_start), min(hi, t_max))
    else:
        duration = t_max - traj.t_start
        epoch = (traj.t_start, t_max)
    window = 0.05 * duration if window is None else window
    d2 = smoothed_second_derivative(sT, dt, window)
    return FluctuationSeries(t, sT, d2, window, _tau_max(pulse), epoch)


# fits --------------------------------------------------------------------

def _prefix_slopes(t, y):
    """Least-squares slope of every prefix ``[0, k]`` (NaN for k < 1)."""
    n = np.arange(1, t.size + 1, dtype=float)
    St, Sy = np.cumsum(t), np.cumsum(y)
    Stt, Sty = np.cumsum(t * t), np.cumsum(t * y)
    den = n * Stt - St * St
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, (n * Sty - St * Sy) / den, np.nan)


def _linfit(t, y):
    A = np.column_stack([np.ones_like(t), t])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    dof = max(t.size - 2, 1)
    resid = y - A @ coef
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(A.T @ A)
    return coef, cov


def exit_time_fluct_fit(
    series: FluctuationSeries, plateau_slope: float = 1e-4, suffix_tol: float = 0.01, min_points: int = 10
):
    """Intersection of the initial-plateau fit with the final linear fit.

    The plateau is the longest prefix whose fitted ``|slope|`` stays below
    ``plateau_slope``, cut short where the final segment begins.  The final segment is the longest suffix on which the
    local slope stays within ``suffix_tol`` (relative) of the slope fitted
    to the last tenth of the series.  ``extras["stderr"]`` is the delta-method standard
    error of the intersection.
    """
    t, y = series.t, series.sT
    tau_max = series.tau_max
    pre = _prefix_slopes(t, y)
    ok = np.abs(pre) < plateau_slope
    ok[:1] = True
    bad = np.nonzero(~ok)[0]
    k_pre = (bad[0] if bad.size else t.size) - 1
    if k_pre + 1 < min_points:
        return _not_found("fluct_fit", tau_max, diagnostic="no initial plateau")
    tail = max(min_points, t.size // 10)
    (_, ref), _ = _linfit(t[-tail:], y[-tail:])
    if not (np.isfinite(ref) and ref != 0):
        return _not_found("fluct_fit", tau_max, diagnostic="final segment has no slope")
    local = np.gradient(y, t)
    stable = np.abs(local - ref) <= suffix_tol * abs(ref)
    bad = np.nonzero(~stable[::-1])[0]
    k_suf = (bad[0] if bad.size else t.size) - 1
    if k_suf + 1 < min_points:
        return _not_found("fluct_fit", tau_max, diagnostic="no stable final segment")
    i0 = t.size - 1 - k_suf
    # a cumulative slope lags behind a sharp kink; stop the plateau where the ramp starts
    k_pre = min(k_pre, i0 - 1)
    if k_pre + 1 < min_points:
        return _not_found("fluct_fit", tau_max, diagnostic="plateau and final segment overlap")
    (a1, b1), c1 = _linfit(t[: k_pre + 1], y[: k_pre + 1])
    (a2, b2), c2 = _linfit(t[i0:], y[i0:])
    if b2 == b1:
        return _not_found("fluct_fit", tau_max, diagnostic="parallel fits")
    tx = (a1 - a2) / (b2 - b1)
    # delta method on tx = (a1 - a2)/(b2 - b1)
    ga = np.array([1.0, tx]) / (b2 - b1)
    var = float(ga @ c1 @ ga + ga @ c2 @ ga)
    return CriterionResult(
        "fluct_fit", float(tx), tau_max, True,
        extras={
            "stderr": math.sqrt(max(var, 0.0)),
            "plateau": (float(t[0]), float(t[k_pre])),
            "final_segment": (float(t[i0]), float(t[-1])),
            "fits": ((float(a1), float(b1)), (float(a2), float(b2))),
        },
    )


def _local_maxima(f):
    return np.nonzero((f[1:-1] > f[:-2]) & (f[1:-1] >= f[2:]))[0] + 1


def _parabolic_vertex(t, f, i):
    if i <= 0 or i >= f.size - 1:
        return float(t[i])
    a, b, c = f[i - 1], f[i], f[i + 1]
    den = a - 2 * b + c
    off = 0.5 * (a - c) / den if den != 0 else 0.0
    return float(t[i] + np.clip(off, -1, 1) * (t[1] - t[0]))


def exit_time_fluct_inflection(
    series: FluctuationSeries, epoch: tuple | None = None, noise_floor: float = 1e-3
):
    """Last falling inflection of the curvature signal ``d²s_T/dt²``.

    Inflections are local minima of the signal's slope inside ``epoch``
    (default: the pulse support) whose depth exceeds ``noise_floor`` times
    the largest slope magnitude there.  The last local maximum of the
    signal above the same relative floor is kept in
    ``extras["last_maximum"]``.
    """
    t, f = series.t, series.d2
    tau_max = series.tau_max
    lo, hi = series.epoch if epoch is None else epoch
    inside = (t >= lo) & (t <= hi)
    if not inside.any():
        return _not_found("fluct_inflection", tau_max, diagnostic="empty pulse epoch")
    slope = np.gradient(f, t)
    f_scale = float(np.max(np.abs(f[inside])))
    g_scale = float(np.max(np.abs(slope[inside])))
    peaks = [i for i in _local_maxima(f) if inside[i] and f[i] > noise_floor * f_scale]
    falls = [i for i in _local_maxima(-slope) if inside[i] and -slope[i] > noise_floor * g_scale]
    if f_scale == 0 or not peaks or not falls:
        return _not_found("fluct_inflection", tau_max, diagnostic="signal too flat")
    t_ex = _parabolic_vertex(t, -slope, falls[-1])
    return CriterionResult(
        "fluct_inflection", t_ex, tau_max, True,
        extras={"last_maximum": _parabolic_vertex(t, f, peaks[-1]), "n_inflections": len(falls)},
    )


# --------------------------------------------------------------------------
# frequency scans
# --------------------------------------------------------------------------

@dataclass
class FrequencyScan:
    omegas: np.ndarray
    amplitudes: np.ndarray
    results: list
    rule: str

    @property
    def tau_ion(self):
        return np.array([r.tau_ionization if r.found else np.nan for r in self.results])

    @property
    def critical_omega(self) -> Optional[float]:
        """First ω without an exit (``None`` if every point has one)."""
        for w, r in zip(self.omegas, self.results):
            if not r.found:
                return float(w)
        return None


def _energy_point(args):
    model, pulse, U, cfg = args
    gs = ground_state_init(model, U)
    lo, hi = pulse.support()
    run_cfg = IntegratorConfig(cfg.rel_tol, cfg.abs_tol, cfg.max_step, hi + 10.0, cfg.max_steps)
    traj = integrate(gs.state.replace(t=max(lo, 0.0)), model, pulse, Lab(), run_cfg)
    res = exit_time_energy(traj)
    res.extras.pop("backprop", None)
    return res


def frequency_scan(
    model,
    omegas,
    F0: float = 0.14,
    rule: str = "fixed_amplitude",
    family=HalfCycleSin3,
    reference_omega: float = 0.05811,
    U=DEFAULT_U,
    cfg: IntegratorConfig | None = None,
    workers: int = 1,
) -> FrequencyScan:
    """Energy criterion over a frequency grid.

    ``rule="fixed_fluence"`` rescales the amplitude as ``F0 √(ω/ω_ref)`` so
    every pulse delivers the same ``∫F² dt`` as ``(F0, reference_omega)``.
    Rows come back in grid order regardless of ``workers``.
    """
    omegas = np.asarray(omegas, dtype=float)
    if omegas.size == 0:
        raise ConfigurationError("empty frequency grid")
    if rule == "fixed_amplitude":
        amps = np.full(omegas.shape, float(F0))
    elif rule == "fixed_fluence":
        amps = np.array([fluence_matched_amplitude(w, (F0, reference_omega)) for w in omegas])
    else:
        raise ConfigurationError(f"unknown amplitude rule {rule!r}")
    cfg = cfg or IntegratorConfig()
    jobs = [(model, family(a, w), U, cfg) for a, w in zip(amps, omegas)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_energy_point, jobs))
    else:
        results = [_energy_point(j) for j in jobs]
    return FrequencyScan(omegas, amps, results, rule)
