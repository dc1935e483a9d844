"""Pure-Python/numpy right-hand side and Dormand–Prince step.

Mirrors the compiled ``_kernels`` extension call for call; selected by
:mod:`tunnelmoments._backend` when the extension is unavailable.
"""

import math

import numpy as np

from .effective import AllOrders, grad_v_eff, v_eff
from .potentials import Lab, frame_field

# Dormand–Prince 5(4) tableau
C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
D = (
    -12715105075 / 11282082432,
    0.0,
    87487479700 / 32700410799,
    -10690763975 / 1880347072,
    701980252875 / 199316789632,
    -1453857185 / 822651844,
    69997945 / 29380423,
)


class System:
    """Hamiltonian flow for one model/pulse/frame combination.

    State layout is ``[x, p, s, ps]`` (quantum) or ``[x, p]`` (classical),
    each block of length ``dim``.
    """

    backend = "python"

    def __init__(self, model, pulse, frame, U, classical=False):
        self.model = model
        self.pulse = pulse
        self.frame = frame or Lab()
        self.dim = model.dim
        self.U = np.broadcast_to(np.asarray(U, dtype=float), (self.dim,)).copy()
        self.classical = bool(classical)
        self.n = (2 if classical else 4) * self.dim
        self.rate = float(getattr(self.frame, "rate", 0.0))

    def field(self, t):
        return frame_field(self.pulse, self.frame, t)

    def _rotation(self, y, out):
        d, w = self.dim, self.rate
        if w and d >= 2:
            x, p = y[:d], y[d:2 * d]
            out[0] += w * x[1]
            out[1] -= w * x[0]
            out[d] += w * p[1]
            out[d + 1] -= w * p[0]

    def rhs(self, t, y):
        y = np.asarray(y, dtype=float)
        d = self.dim
        F = self.field(t)
        out = np.empty(self.n)
        out[:d] = y[d:2 * d]
        if self.classical:
            out[d:] = -self.model.gradient(y[:d], F)
        else:
            gx, gs = grad_v_eff(AllOrders, self.model, y[:d], y[2 * d:3 * d], self.U, F)
            out[d:2 * d] = -gx
            out[2 * d:3 * d] = y[3 * d:]
            out[3 * d:] = -gs
        self._rotation(y, out)
        return out

    def _energy(self, t, y, F, rotation):
        d = self.dim
        y = np.asarray(y, dtype=float)
        if self.classical:
            e = 0.5 * float(y[d:] @ y[d:]) + float(self.model.value(y[:d], F))
        else:
            kin = 0.5 * float(y[d:2 * d] @ y[d:2 * d] + y[3 * d:] @ y[3 * d:])
            e = kin + v_eff(self.model, y[:d], y[2 * d:3 * d], self.U, F)
        if rotation and self.rate and d >= 2:
            e += self.rate * (y[d] * y[1] - y[d + 1] * y[0])
        return e

    def hamiltonian(self, t, y):
        return self._energy(t, y, self.field(t), True)

    def free_energy(self, t, y):
        """Energy with the external field switched off (no frame coupling)."""
        return self._energy(t, y, None, False)

    def _bad(self, y):
        if self.classical:
            return not np.all(np.isfinite(y))
        d = self.dim
        return not (np.all(np.isfinite(y)) and np.all(y[2 * d:3 * d] > 0.0))

    def step(self, t, y, f0, h, rtol, atol):
        """One Dormand–Prince trial step.

        Returns ``(y_new, f_new, err, dense)``; ``err`` is the scaled RMS
        error (``inf`` if a stage left the domain ``s > 0``) and ``dense`` is
        the fifth continuous-extension coefficient vector.
        """
        y = np.asarray(y, dtype=float)
        k = [np.asarray(f0, dtype=float)]
        for i in range(1, 7):
            yi = y + h * sum(a * kj for a, kj in zip(A[i], k) if a)
            if self._bad(yi):
                return yi, k[0], math.inf, None
            k.append(self.rhs(t + C[i] * h, yi))
        y_new = yi
        f_new = k[6]
        err_vec = h * sum(e * kj for e, kj in zip(E, k) if e)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = math.sqrt(float(np.mean((err_vec / scale) ** 2)))
        dense = h * sum(dd * kj for dd, kj in zip(D, k) if dd)
        if not np.all(np.isfinite(f_new)):
            err = math.inf
        return y_new, f_new, err, dense
