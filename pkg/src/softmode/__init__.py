"""Force-sensing noise spectra for optomechanical cavities with linear and
quadratic coupling: steady states, stability, noise budgets and the SQL."""

from softmode.errors import (
    BracketError,
    DivergentSensitivity,
    NonConvergence,
    ParameterError,
    PhysicsError,
    UnphysicalSoftMode,
    UnstableSystem,
)
from softmode.params import (
    BareDetuning,
    DerivedScalars,
    EffectiveDetuning,
    SystemParams,
    derive_scalars,
    normalize_force,
    reference_params,
    to_si_spectrum,
)
from softmode.steady_state import (
    SteadyState,
    find_all_branches,
    solve_steady_state,
    steady_state_residual,
)
from softmode.stability import (
    StabilityReport,
    build_drift_matrix,
    characteristic_polynomial,
    classify,
    classify_state,
    routh_hurwitz,
)
from softmode.noise import (
    SOFT_MODE,
    NoiseBreakdown,
    OptimalPower,
    TransferFunctions,
    optimal_power,
    s_ff_full,
    s_ff_no_qoc,
    s_ff_resonant,
    sql_bound,
    susceptibility,
    thermal_noise,
    transfer_functions,
)

__version__ = "0.1.0"
