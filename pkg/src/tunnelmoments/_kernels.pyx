# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled right-hand side and Dormand–Prince step.

Same interface as :mod:`tunnelmoments._kernels_py`; models and pulses are
passed in through their ``kernel_spec()`` codes.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, sin, cos, fabs, INFINITY, isfinite, M_PI

from .errors import SingularityError
from .potentials import Lab

cnp.import_array()

# keep in sync with potentials.py
cdef enum:
    M_FREE = 0
    M_HARMONIC = 1
    M_GAUSSIAN = 2
    M_COULOMB = 3
    M_HYDROGEN = 4
    P_NONE = -1
    P_STATIC = 0
    P_HALF = 1
    P_SINENV = 2
    P_COSENV = 3
    P_ROT = 4

cdef double[7] CC = [0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0]
# lower-triangular stage matrix, row-major 7x6
cdef double[42] AA = [
    0, 0, 0, 0, 0, 0,
    1.0 / 5, 0, 0, 0, 0, 0,
    3.0 / 40, 9.0 / 40, 0, 0, 0, 0,
    44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0,
    19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0,
    9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0,
    35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84,
]
cdef double[7] EE = [71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920,
                     -17253.0 / 339200, 22.0 / 525, -1.0 / 40]
cdef double[7] DD = [-12715105075.0 / 11282082432, 0.0, 87487479700.0 / 32700410799,
                     -10690763975.0 / 1880347072, 701980252875.0 / 199316789632,
                     -1453857185.0 / 822651844, 69997945.0 / 29380423]


cdef class System:
    cdef public int dim, n
    cdef public bint classical
    cdef public double rate
    cdef public object model, pulse, frame
    cdef int mcode, pcode, ncorner
    cdef double mp[4]
    cdef double pp[8]
    cdef double U[3]
    cdef double signs[8][3]
    cdef double[:, :] k
    cdef double[:] ytmp

    backend = "cython"

    def __init__(self, model, pulse, frame, U, classical=False):
        cdef int i, j
        self.model = model
        self.pulse = pulse
        self.frame = frame if frame is not None else Lab()
        self.dim = model.dim
        self.classical = classical
        self.n = (2 if classical else 4) * self.dim
        self.rate = float(getattr(self.frame, "rate", 0.0))
        code, params = model.kernel_spec()
        self.mcode = code
        for i in range(4):
            self.mp[i] = 0.0
        for i, v in enumerate(params):
            self.mp[i] = v
        if pulse is None:
            self.pcode = P_NONE
        else:
            code, params = pulse.kernel_spec()
            self.pcode = code
            for i in range(8):
                self.pp[i] = 0.0
            for i, v in enumerate(params):
                self.pp[i] = v
        Uarr = np.broadcast_to(np.asarray(U, dtype=float), (self.dim,))
        for i in range(self.dim):
            self.U[i] = Uarr[i]
        self.ncorner = 1 << self.dim
        for i in range(self.ncorner):
            for j in range(self.dim):
                # same ordering as itertools.product((1, -1), repeat=dim)
                self.signs[i][j] = -1.0 if (i >> (self.dim - 1 - j)) & 1 else 1.0
        self.k = np.zeros((7, self.n))
        self.ytmp = np.zeros(self.n)

    # ------------------------------------------------------------------ field
    cdef void _lab_field(self, double t, double* E) noexcept nogil:
        cdef double w, wt, amp, u, c, sn, N, eps, half, c3
        E[0] = 0.0
        E[1] = 0.0
        E[2] = 0.0
        if self.pcode == P_STATIC:
            E[0] = self.pp[0]
            E[1] = self.pp[1]
            E[2] = self.pp[2]
        elif self.pcode == P_HALF:
            w = self.pp[1]
            if t > 0.0 and t < M_PI / w:
                amp = sin(w * t)
                E[0] = -self.pp[0] * amp * amp * amp
        elif self.pcode == P_SINENV:
            w = self.pp[1]
            N = self.pp[2]
            if t > 0.0 and t < 2.0 * M_PI * N / w:
                amp = sin(w * t / (2.0 * N))
                E[0] = -self.pp[0] * amp * amp * sin(w * t)
        elif self.pcode == P_COSENV:
            w = self.pp[1]
            N = self.pp[2]
            eps = self.pp[3]
            half = M_PI * N / w
            if t > -half and t < half:
                u = w * t / (2.0 * N)
                c = cos(u)
                sn = sin(u)
                c3 = c * c * c
                wt = w * t
                amp = self.pp[0] * w / sqrt(1.0 + eps * eps)
                E[0] = amp * (c3 * c * sin(wt) + (2.0 / N) * c3 * sn * cos(wt))
                E[1] = amp * eps * (c3 * c * cos(wt) - (2.0 / N) * c3 * sn * sin(wt))
        elif self.pcode == P_ROT:
            w = self.pp[1]
            if t > 0.0 and t < M_PI / w:
                wt = w * t
                amp = -self.pp[0] * sin(wt) * sin(wt)
                E[0] = amp * sin(wt)
                E[1] = amp * cos(wt)

    cdef void _field(self, double t, double* E) noexcept nogil:
        cdef double phi, s, c, e0, e1
        self._lab_field(t, E)
        if self.rate != 0.0:
            phi = self.rate * t
            s = sin(phi)
            c = cos(phi)
            e0 = E[0]
            e1 = E[1]
            # S(phi)^T applied to the lab field
            E[0] = s * e0 + c * e1
            E[1] = -c * e0 + s * e1

    def field(self, double t):
        cdef double E[3]
        self._field(t, E)
        return np.array([E[0], E[1], E[2]])

    # -------------------------------------------------------------- potential
    cdef int _point(self, const double* r, const double* F, double* V, double* g) except -1:
        """Potential value and gradient at one point."""
        cdef int i, d = self.dim
        cdef double r2 = 0.0, rho, rho3, rho5, rF = 0.0, ex, alpha, eps
        for i in range(d):
            r2 += r[i] * r[i]
            rF += r[i] * F[i]
        if self.mcode == M_FREE:
            V[0] = rF
            for i in range(d):
                g[i] = F[i]
        elif self.mcode == M_HARMONIC:
            V[0] = 0.5 * self.mp[0] * r2 + rF
            for i in range(d):
                g[i] = self.mp[0] * r[i] + F[i]
        elif self.mcode == M_GAUSSIAN:
            ex = exp(-r[0] * r[0])
            V[0] = -self.mp[0] * ex + r[0] * F[0]
            g[0] = 2.0 * self.mp[0] * r[0] * ex + F[0]
        elif self.mcode == M_COULOMB:
            alpha = self.mp[0]
            eps = self.mp[1]
            if eps == 0.0 and r2 == 0.0:
                raise SingularityError("Coulomb potential evaluated at r = 0 without softening")
            rho = sqrt(r2 + eps * eps)
            rho3 = rho * rho * rho
            rho5 = rho3 * rho * rho
            V[0] = -1.0 / rho - rF - alpha * rF / rho3
            for i in range(d):
                g[i] = r[i] / rho3 - F[i] - alpha * (F[i] / rho3 - 3.0 * rF * r[i] / rho5)
        elif self.mcode == M_HYDROGEN:
            eps = self.mp[0]
            if eps == 0.0 and r2 == 0.0:
                raise SingularityError("Coulomb potential evaluated at r = 0 without softening")
            rho = sqrt(r2 + eps * eps)
            rho3 = rho * rho * rho
            V[0] = -1.0 / rho + rF
            for i in range(d):
                g[i] = r[i] / rho3 + F[i]
        return 0

    cdef int _veff(self, const double* x, const double* s, const double* F,
                   double* V, double* gx, double* gs) except -1:
        cdef int c, i, d = self.dim
        cdef double r[3]
        cdef double g[3]
        cdef double v, inv = 1.0 / self.ncorner
        V[0] = 0.0
        for i in range(d):
            gx[i] = 0.0
            gs[i] = 0.0
        for c in range(self.ncorner):
            for i in range(d):
                r[i] = x[i] + self.signs[c][i] * s[i]
            self._point(r, F, &v, g)
            V[0] += v
            for i in range(d):
                gx[i] += g[i]
                gs[i] += self.signs[c][i] * g[i]
        V[0] *= inv
        for i in range(d):
            gx[i] *= inv
            gs[i] = gs[i] * inv - self.U[i] / (s[i] * s[i] * s[i])
            V[0] += 0.5 * self.U[i] / (s[i] * s[i])
        return 0

    cdef int _rhs(self, double t, const double* y, double* out) except -1:
        cdef int i, d = self.dim
        cdef double F[3]
        cdef double V
        cdef double gx[3]
        cdef double gs[3]
        self._field(t, F)
        for i in range(d):
            out[i] = y[d + i]
        if self.classical:
            self._point(y, F, &V, gx)
            for i in range(d):
                out[d + i] = -gx[i]
        else:
            self._veff(y, y + 2 * d, F, &V, gx, gs)
            for i in range(d):
                out[d + i] = -gx[i]
                out[2 * d + i] = y[3 * d + i]
                out[3 * d + i] = -gs[i]
        if self.rate != 0.0 and d >= 2:
            out[0] += self.rate * y[1]
            out[1] -= self.rate * y[0]
            out[d] += self.rate * y[d + 1]
            out[d + 1] -= self.rate * y[d]
        return 0

    def rhs(self, double t, y):
        cdef const double[::1] yv = np.ascontiguousarray(y, dtype=float)
        out = np.empty(self.n)
        cdef double[::1] ov = out
        self._rhs(t, &yv[0], &ov[0])
        return out

    cdef double _energy(self, const double* y, const double* F, bint rotation) except? -1e300:
        cdef int i, d = self.dim
        cdef double e = 0.0, V
        cdef double gx[3]
        cdef double gs[3]
        if self.classical:
            for i in range(d):
                e += 0.5 * y[d + i] * y[d + i]
            self._point(y, F, &V, gx)
        else:
            for i in range(d):
                e += 0.5 * (y[d + i] * y[d + i] + y[3 * d + i] * y[3 * d + i])
            self._veff(y, y + 2 * d, F, &V, gx, gs)
        e += V
        if rotation and self.rate != 0.0 and d >= 2:
            e += self.rate * (y[d] * y[1] - y[d + 1] * y[0])
        return e

    def hamiltonian(self, double t, y):
        cdef const double[::1] yv = np.ascontiguousarray(y, dtype=float)
        cdef double F[3]
        self._field(t, F)
        return self._energy(&yv[0], F, True)

    def free_energy(self, double t, y):
        cdef const double[::1] yv = np.ascontiguousarray(y, dtype=float)
        cdef double F[3]
        F[0] = 0.0
        F[1] = 0.0
        F[2] = 0.0
        return self._energy(&yv[0], F, False)

    cdef bint _bad(self, const double* y) noexcept:
        cdef int i, d = self.dim
        for i in range(self.n):
            if not isfinite(y[i]):
                return True
        if not self.classical:
            for i in range(d):
                if y[2 * d + i] <= 0.0:
                    return True
        return False

    def step(self, double t, y, f0, double h, double rtol, double atol):
        cdef const double[::1] yv = np.ascontiguousarray(y, dtype=float)
        cdef const double[::1] fv = np.ascontiguousarray(f0, dtype=float)
        cdef int i, j, m, n = self.n
        cdef double[:, :] k = self.k
        cdef double[:] yt = self.ytmp
        cdef double acc, err, sk, ev
        y_new = np.empty(n)
        dense = np.empty(n)
        cdef double[::1] yn = y_new
        cdef double[::1] dv = dense
        for m in range(n):
            k[0, m] = fv[m]
        for i in range(1, 7):
            for m in range(n):
                acc = 0.0
                for j in range(i):
                    acc += AA[6 * i + j] * k[j, m]
                yt[m] = yv[m] + h * acc
            if self._bad(&yt[0]):
                return np.asarray(yt).copy(), np.asarray(fv).copy(), INFINITY, None
            self._rhs(t + CC[i] * h, &yt[0], &k[i, 0])
        err = 0.0
        for m in range(n):
            yn[m] = yt[m]
            ev = 0.0
            acc = 0.0
            for j in range(7):
                ev += EE[j] * k[j, m]
                acc += DD[j] * k[j, m]
            dv[m] = h * acc
            sk = atol + rtol * max(fabs(yv[m]), fabs(yn[m]))
            ev = h * ev / sk
            err += ev * ev
        err = sqrt(err / n)
        f_new = np.asarray(k[6, :]).copy()
        for m in range(n):
            if not isfinite(k[6, m]):
                err = INFINITY
        return y_new, f_new, err, dense
