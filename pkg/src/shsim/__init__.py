"""Spectral Galerkin simulation of a sphere-constrained stochastic
Swift-Hohenberg equation, with Monte Carlo checks of its a priori bounds and
martingale structure."""

from .brownian import BrownianPath, sample_brownian
from .config import RunSpec, config_hash, parse_config, parse_config_text
from .dynamics import (
    ModelParams,
    constrained_rhs,
    drift_ito,
    drift_strat,
    galerkin_rhs,
    nonlinearity_F,
)
from .errors import (
    ConfigurationError,
    DegenerateInitialCondition,
    DomainError,
    IntegrationError,
)
from .geometry import (
    NoiseModel,
    OffSphereWarning,
    assert_on_sphere,
    ito_correction,
    noise_field,
    project_tangent,
)
from .integrator import (
    SimConfig,
    StiffnessWarning,
    Trajectory,
    initial_condition,
    simulate,
    simulate_ensemble,
    step,
)
from .kernels import BACKEND
from .spectral import (
    BasisSpec,
    GridField,
    SpectralField,
    apply_A,
    apply_semigroup,
    build_basis,
    from_grid,
    norms,
    project_Zn,
    to_grid,
)
from .verification import EstimateReport

__version__ = "0.1.0"
