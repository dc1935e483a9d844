"""Effective potentials on the extended phase space.

The all-orders form averages the classical potential over the ``2^d``
corners ``x ± s`` (one sign per axis) and adds ``U/(2s²)`` per axis.  The
second-order form keeps only the curvature correction ``½ V''(x) s²``.
Cross-correlations between axes are not represented.
"""

from __future__ import annotations

import csv
import enum
import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import ndimage
from skimage import measure

from .errors import ConfigurationError, DomainError


class EffPotentialKind(enum.Enum):
    SECOND_ORDER = "second_order"
    ALL_ORDERS = "all_orders"


SecondOrder = EffPotentialKind.SECOND_ORDER
AllOrders = EffPotentialKind.ALL_ORDERS


@lru_cache(maxsize=None)
def corner_signs(dim: int) -> np.ndarray:
    """``(2^dim, dim)`` array of ±1, first row all +1."""
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=dim)))
    signs.setflags(write=False)
    return signs


class CustomPotential:
    """Wrap plain callables so they can be used wherever a model is expected.

    ``value(r)`` receives positions of shape ``(..., dim)``.  The optional
    derivative callables are needed for gradients and the second-order form.
    """

    def __init__(self, value, gradient=None, hessian_diag=None, third_diag=None, dim=1):
        self._value = value
        self._gradient = gradient
        self._hessian = hessian_diag
        self._third = third_diag
        self.dim = dim

    def value(self, r, F=None):
        return np.asarray(self._value(np.asarray(r, dtype=float)), dtype=float)

    def gradient(self, r, F=None):
        if self._gradient is None:
            raise ConfigurationError("this potential has no gradient")
        return np.asarray(self._gradient(np.asarray(r, dtype=float)), dtype=float)

    def hessian_diag(self, r, F=None):
        if self._hessian is None:
            raise ConfigurationError("this potential has no second derivative")
        return np.asarray(self._hessian(np.asarray(r, dtype=float)), dtype=float)

    def third_diag(self, r, F=None):
        if self._third is None:
            raise ConfigurationError("this potential has no third derivative")
        return np.asarray(self._third(np.asarray(r, dtype=float)), dtype=float)


def _as_potential(V, dim=None):
    if hasattr(V, "value"):
        return V
    if callable(V):
        return CustomPotential(lambda r: V(r[..., 0]) if (dim or 1) == 1 else V(r), dim=dim or 1)
    raise ConfigurationError(f"cannot use {V!r} as a potential")


def _prepare(V, x, s, U):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s = np.atleast_1d(np.asarray(s, dtype=float))
    V = _as_potential(V, x.shape[-1])
    U = np.broadcast_to(np.asarray(U, dtype=float), s.shape)
    if x.shape != s.shape:
        raise ConfigurationError(f"x has shape {x.shape} but s has {s.shape}")
    if x.shape[-1] != V.dim:
        raise ConfigurationError(f"state has dimension {x.shape[-1]}, potential needs {V.dim}")
    if np.any(s <= 0):
        raise DomainError("fluctuation coordinates must be positive")
    return V, x, s, U


def _third_diag(V, x, F):
    if isinstance(V, CustomPotential):
        return V.third_diag(x, F)
    from .potentials import Free, GaussianWell1D, Harmonic

    if isinstance(V, (Free, Harmonic)):
        return np.zeros_like(x)
    if isinstance(V, GaussianWell1D):
        return 4.0 * V.depth * x * np.exp(-x * x) * (2.0 * x * x - 3.0)
    raise ConfigurationError(
        f"second-order gradient needs third derivatives, unavailable for {type(V).__name__}"
    )


def v_eff(V, x, s, U, F=None, kind: EffPotentialKind = AllOrders):
    """Effective potential for any dimension; broadcasts over leading axes."""
    V, x, s, U = _prepare(V, x, s, U)
    barrier = np.sum(U / (2.0 * s * s), axis=-1)
    if kind is AllOrders:
        corners = x[..., None, :] + corner_signs(x.shape[-1]) * s[..., None, :]
        out = barrier + np.mean(V.value(corners, F), axis=-1)
    elif kind is SecondOrder:
        out = barrier + V.value(x, F) + 0.5 * np.sum(V.hessian_diag(x, F) * s * s, axis=-1)
    else:
        raise ConfigurationError(f"unknown effective potential kind {kind!r}")
    return float(out) if np.ndim(out) == 0 else out


def v_eff_1d(kind: EffPotentialKind, V, x, s, U, F=None):
    """One-dimensional ``V_eff(x, s)`` of the requested kind."""
    x = np.asarray(x, dtype=float)[..., None]
    s = np.asarray(s, dtype=float)[..., None]
    return v_eff(V, x, s, U, F, kind)


def v_eff_3d(V, x, s, U, F=None):
    """Exact 8-corner average plus ``Σ U/(2sᵢ²)``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 3:
        raise ConfigurationError(f"v_eff_3d needs 3-vectors, got shape {x.shape}")
    return v_eff(V, x, s, U, F, AllOrders)


def grad_v_eff(kind: EffPotentialKind, V, x, s, U, F=None):
    """Analytic ``(∂V_eff/∂x, ∂V_eff/∂s)``."""
    V, x, s, U = _prepare(V, x, s, U)
    d_barrier = -U / s ** 3
    if kind is AllOrders:
        signs = corner_signs(x.shape[-1])
        g = V.gradient(x[..., None, :] + signs * s[..., None, :], F)
        return np.mean(g, axis=-2), d_barrier + np.mean(g * signs, axis=-2)
    if kind is SecondOrder:
        curv = V.hessian_diag(x, F)
        gx = V.gradient(x, F) + 0.5 * _third_diag(V, x, F) * s * s
        return gx, d_barrier + curv * s
    raise ConfigurationError(f"unknown effective potential kind {kind!r}")


# --------------------------------------------------------------------------
# equipotential contours
# --------------------------------------------------------------------------

@dataclass
class ContourGrid:
    """Level set of ``V_eff`` in the (x, s) plane of one axis.

    ``segments`` holds one ``(n, 2)`` array of ``(x, s)`` points per polyline.
    """

    x_range: tuple
    s_range: tuple
    resolution: tuple
    level: float
    segments: list = field(default_factory=list)
    values: np.ndarray | None = None
    axis: int = 0

    @property
    def x_grid(self):
        return np.linspace(*self.x_range, self.resolution[0])

    @property
    def s_grid(self):
        return np.linspace(*self.s_range, self.resolution[1])

    @property
    def is_empty(self):
        return not self.segments

    def rows(self):
        for seg_id, seg in enumerate(self.segments):
            for xv, sv in seg:
                yield float(xv), float(sv), seg_id

    def to_csv(self, path, x_label="x3", s_label="s3"):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([x_label, s_label, "segment_id"])
            for xv, sv, seg_id in self.rows():
                writer.writerow([repr(xv), repr(sv), seg_id])


def _plane_values(model, F, U, xs, ss, axis, frozen_s):
    dim = model.dim
    X, S = np.meshgrid(xs, ss, indexing="ij")
    x = np.zeros(X.shape + (dim,))
    s = np.empty(X.shape + (dim,))
    s[...] = frozen_s
    x[..., axis] = X
    s[..., axis] = S
    return v_eff(model, x, s, U, F)


def _default_axis_and_frozen(model, U, axis, frozen_s):
    if axis is None:
        axis = model.dim - 1
    if frozen_s is None:
        from .dynamics import ground_state_init

        frozen_s = ground_state_init(model, U).s
    frozen_s = np.broadcast_to(np.asarray(frozen_s, dtype=float), (model.dim,))
    return axis, frozen_s


def equipotential_contour(
    model,
    F,
    level,
    x_range=(-4.0, 20.0),
    s_range=(0.2, 20.0),
    resolution=(241, 199),
    U=0.25,
    axis=None,
    frozen_s=None,
):
    """Marching-squares polylines of ``V_eff = level``.

    The plane is spanned by ``x[axis]`` and ``s[axis]`` (default: the last
    axis); other positions are zero and other widths stay at ``frozen_s``
    (default: ground-state widths).
    """
    axis, frozen_s = _default_axis_and_frozen(model, U, axis, frozen_s)
    xs = np.linspace(*x_range, resolution[0])
    ss = np.linspace(*s_range, resolution[1])
    values = _plane_values(model, F, U, xs, ss, axis, frozen_s)
    segments = []
    dx = xs[1] - xs[0]
    ds = ss[1] - ss[0]
    if values.min() <= level <= values.max():
        for path in measure.find_contours(values, level):
            segments.append(np.column_stack([xs[0] + path[:, 0] * dx, ss[0] + path[:, 1] * ds]))
    return ContourGrid(
        x_range=tuple(x_range),
        s_range=tuple(s_range),
        resolution=tuple(resolution),
        level=float(level),
        segments=segments,
        values=values,
        axis=axis,
    )


def channel_open(contour: ContourGrid, start):
    """Whether the allowed region ``V_eff < level`` next to ``start = (x, s)``
    reaches the right-hand edge of the grid."""
    allowed = contour.values < contour.level
    labels, _ = ndimage.label(allowed)
    xs, ss = contour.x_grid, contour.s_grid
    i = int(np.argmin(np.abs(xs - start[0])))
    j = int(np.argmin(np.abs(ss - start[1])))
    window = labels[max(i - 2, 0): i + 3, max(j - 2, 0): j + 3]
    near = set(np.unique(window[window > 0]).tolist())
    edge = set(np.unique(labels[-1, :][labels[-1, :] > 0]).tolist())
    return bool(near & edge)
