"""Extended phase-space dynamics of tunnelling wave packets.

Expectation values and second-order fluctuations evolve as a classical
Hamiltonian system; tunnelling exit times are read off the trajectories.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .analysis import (
    CriterionResult,
    FluctuationSeries,
    exit_time_energy,
    exit_time_fluct_fit,
    exit_time_fluct_inflection,
    exit_time_momentum_backprop,
    frequency_scan,
    offset_angle,
    spot_size,
    static_traversal,
    transverse_fluctuation,
    wkb_like_time,
)
from .dynamics import (
    IntegratorConfig,
    Trajectory,
    calibrate_well_depth,
    classical_backpropagate,
    eom,
    ground_state_init,
    integrate,
)
from .effective import AllOrders, SecondOrder, equipotential_contour, v_eff, v_eff_1d, v_eff_3d
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DomainError,
    IntegrationError,
    SingularityError,
)
from .phase_space import (
    DEFAULT_U,
    ExtendedState,
    MomentSet,
    canonical_from_moments,
    moments_from_canonical,
    quantum_hamiltonian,
)
from .potentials import (
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
    field_vector,
    peak_time,
)
