import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tunnelmoments.errors import ConfigurationError, DomainError
from tunnelmoments.phase_space import (
    AxisState,
    ExtendedState,
    MomentSet,
    canonical_from_moments,
    moments_from_canonical,
    quantum_hamiltonian,
)
from tunnelmoments.potentials import Coulomb3D, Free, GaussianWell1D, Harmonic

S0 = 3.0 * math.sqrt(3.0) / 4.0


@pytest.mark.parametrize(
    "s, ps, U, expected",
    [
        (2.0, 0.0, 0.25, (4.0, 0.0, 1.0 / 16.0)),
        (1.0, 1.0, 0.0, (1.0, 1.0, 1.0)),
        (S0, 0.0, 0.25, (27.0 / 16.0, 0.0, 4.0 / 27.0)),
    ],
)
def test_moments_from_canonical_examples(s, ps, U, expected):
    m = moments_from_canonical(s, ps, U)
    assert (m.dxx, m.dxp, m.dpp) == pytest.approx(expected, rel=1e-14, abs=1e-15)


@pytest.mark.parametrize(
    "m, expected",
    [((4.0, 0.0, 1.0 / 16.0), (2.0, 0.0, 0.25)), ((1.0, 1.0, 1.0), (1.0, 1.0, 0.0))],
)
def test_canonical_from_moments_examples(m, expected):
    assert canonical_from_moments(MomentSet(*m)) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("s", [0.0, -1.0, float("nan")])
def test_non_positive_width_rejected(s):
    with pytest.raises(DomainError):
        moments_from_canonical(s, 0.0, 0.25)


def test_negative_U_rejected():
    with pytest.raises(DomainError):
        moments_from_canonical(1.0, 0.0, -0.1)


def test_invalid_moments_rejected():
    with pytest.raises(DomainError):
        canonical_from_moments(MomentSet(-1.0, 0.0, 1.0))
    with pytest.raises(DomainError):
        canonical_from_moments(MomentSet(1.0, 2.0, 1.0))


@settings(max_examples=300, deadline=None)
@given(
    s=st.floats(1e-3, 1e3),
    ps=st.floats(-1e2, 1e2),
    U=st.floats(1e-3, 10.0),
)
def test_round_trip_and_uncertainty_identity(s, ps, U):
    m = moments_from_canonical(s, ps, U)
    assert m.uncertainty == pytest.approx(U, rel=1e-12, abs=1e-12 * m.dxp ** 2)
    s2, ps2, U2 = canonical_from_moments(m)
    assert s2 == pytest.approx(s, rel=1e-12)
    assert ps2 == pytest.approx(ps, rel=1e-12, abs=1e-12 * abs(U / s))
    m2 = moments_from_canonical(s2, ps2, U2)
    for a, b in zip((m.dxx, m.dxp, m.dpp), (m2.dxx, m2.dxp, m2.dpp)):
        assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


def _bracket(f, g, s, ps, U, h=1e-5):
    """Poisson bracket on the (s, p_s) plane by central differences."""
    fs = (f(s + h, ps, U) - f(s - h, ps, U)) / (2 * h)
    fp = (f(s, ps + h, U) - f(s, ps - h, U)) / (2 * h)
    gs = (g(s + h, ps, U) - g(s - h, ps, U)) / (2 * h)
    gp = (g(s, ps + h, U) - g(s, ps - h, U)) / (2 * h)
    return fs * gp - fp * gs


def test_poisson_brackets_close_the_algebra():
    rng = np.random.default_rng(4)
    xx = lambda s, ps, U: moments_from_canonical(s, ps, U).dxx
    xp = lambda s, ps, U: moments_from_canonical(s, ps, U).dxp
    pp = lambda s, ps, U: moments_from_canonical(s, ps, U).dpp
    for s, ps, U in zip(rng.uniform(0.5, 3, 100), rng.uniform(-2, 2, 100), rng.uniform(0.1, 1, 100)):
        m = moments_from_canonical(s, ps, U)
        assert _bracket(xx, xp, s, ps, U) == pytest.approx(2 * m.dxx, rel=1e-9, abs=1e-9)
        assert _bracket(xx, pp, s, ps, U) == pytest.approx(4 * m.dxp, rel=1e-9, abs=1e-9)
        assert _bracket(xp, pp, s, ps, U) == pytest.approx(2 * m.dpp, rel=1e-9, abs=1e-9)


class TestExtendedState:
    def test_scalar_U_broadcasts(self):
        st3 = ExtendedState(x=[0, 0, 0], p=[0, 0, 0], s=[1, 2, 3], ps=[0, 0, 0], U=0.25)
        assert st3.dim == 3
        np.testing.assert_array_equal(st3.U, [0.25] * 3)

    def test_arrays_are_read_only(self):
        st1 = ExtendedState(x=[0.0], p=[0.0], s=[1.0], ps=[0.0], U=0.25)
        with pytest.raises(ValueError):
            st1.x[0] = 1.0

    def test_vector_round_trip(self):
        st3 = ExtendedState(x=[1, 2, 3], p=[4, 5, 6], s=[7, 8, 9], ps=[10, 11, 12], U=0.3, t=2.5)
        back = ExtendedState.from_vector(st3.to_vector(), st3.U, st3.t)
        np.testing.assert_array_equal(back.to_vector(), st3.to_vector())
        assert back.t == 2.5

    def test_axes_view(self):
        st1 = ExtendedState.from_axes([AxisState(1.0, 2.0, 3.0, 4.0)], U=0.25)
        assert st1.axes[0] == AxisState(1.0, 2.0, 3.0, 4.0)

    @pytest.mark.parametrize("n", [2, 4])
    def test_dimension_must_be_one_or_three(self, n):
        with pytest.raises(ConfigurationError):
            ExtendedState(x=[0] * n, p=[0] * n, s=[1] * n, ps=[0] * n, U=0.25)

    def test_mismatched_blocks(self):
        with pytest.raises(ConfigurationError):
            ExtendedState(x=[0, 0, 0], p=[0], s=[1, 1, 1], ps=[0, 0, 0], U=0.25)

    def test_width_positivity(self):
        with pytest.raises(DomainError):
            ExtendedState(x=[0.0], p=[0.0], s=[0.0], ps=[0.0], U=0.25)
        with pytest.raises(DomainError):
            AxisState(0.0, 0.0, -1.0, 0.0)

    def test_U_positivity(self):
        with pytest.raises(DomainError):
            ExtendedState(x=[0.0], p=[0.0], s=[1.0], ps=[0.0], U=0.0)


class TestQuantumHamiltonian:
    def test_coulomb_ground_state_energy(self):
        st3 = ExtendedState(x=[0] * 3, p=[0] * 3, s=[S0] * 3, ps=[0] * 3, U=0.25)
        assert quantum_hamiltonian(st3, Coulomb3D()) == pytest.approx(-2.0 / 9.0, abs=1e-12)

    def test_free_particle(self):
        st1 = ExtendedState(x=[0.0], p=[0.0], s=[1.0], ps=[0.0], U=0.25)
        assert quantum_hamiltonian(st1, Free()) == pytest.approx(1.0 / 8.0, abs=1e-15)

    def test_harmonic(self):
        st1 = ExtendedState(x=[0.0], p=[0.0], s=[1.0], ps=[0.0], U=0.25)
        assert quantum_hamiltonian(st1, Harmonic(k=1.0)) == pytest.approx(1.0 / 8.0 + 0.5, abs=1e-15)

    def test_kinetic_terms(self):
        st1 = ExtendedState(x=[0.0], p=[0.3], s=[1.0], ps=[-0.4], U=0.25)
        assert quantum_hamiltonian(st1, Free()) == pytest.approx(0.125 + 0.5 * (0.09 + 0.16))

    def test_dimension_mismatch(self):
        st1 = ExtendedState(x=[0.0], p=[0.0], s=[1.0], ps=[0.0], U=0.25)
        with pytest.raises(ConfigurationError):
            quantum_hamiltonian(st1, Coulomb3D())
        st3 = ExtendedState(x=[0] * 3, p=[0] * 3, s=[1] * 3, ps=[0] * 3, U=0.25)
        with pytest.raises(ConfigurationError):
            quantum_hamiltonian(st3, GaussianWell1D())
