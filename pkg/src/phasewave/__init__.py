"""Deterministic phase-space transport and its wave-mechanical limits."""
from __future__ import annotations

from ._fft import get_workers, set_workers
from .errors import (
    AliasingError,
    CausticError,
    ConfigurationError,
    CutoffError,
    DataError,
    EscapeError,
    MeasurementError,
    NodeError,
    NumericalError,
    ParameterError,
    PhasewaveError,
    ResolutionWarning,
    StructuralError,
    UnwrapError,
)
from .grid import (
    EPS_NEG,
    HARD_NEG,
    MASS_TOL,
    N_FLOOR,
    Grid1D,
    KSpaceField,
    MomentFields,
    ParticleParams,
    PhaseSpaceField,
    fourier_k_to_p,
    fourier_p_to_k,
    moments,
)
from .fokkerplanck import (
    EnsembleResult,
    EnsembleStats,
    GaussianCloud,
    SpeedFit,
    ThermalParams,
    damped_action_step,
    fp_step,
    gibbs_state,
    langevin_ensemble,
    measure_wave_speed,
    moment_step,
    smoluchowski_step,
    thermal_sound_evolve,
)
from .liouville import (
    ActionState,
    Potential,
    action_to_phase_space,
    cfl_limit,
    coherence_defect,
    evolve_action_wave,
    field_energy,
    liouville_step,
)
from .variational import (
    GAUGE_GRAIN,
    action_functional,
    functional_gradient_check,
    gauge_invariance_check,
    hamiltonian_functional,
    ramp_split,
    slope_of,
    symplectic_forms,
    symplectic_identity_check,
)
from .wigner import (
    ResidualReport,
    WaveFunction,
    glauber_state,
    madelung_decompose,
    quartic_residual,
    tdse_step,
    wave_energy,
    wigner_transform,
)
from .acceptance import CheckResult, run_acceptance

__version__ = "0.1.0"

__all__ = [
    "ActionState",
    "AliasingError",
    "CausticError",
    "CheckResult",
    "ConfigurationError",
    "CutoffError",
    "DataError",
    "EPS_NEG",
    "EnsembleResult",
    "EnsembleStats",
    "EscapeError",
    "GAUGE_GRAIN",
    "GaussianCloud",
    "Grid1D",
    "HARD_NEG",
    "KSpaceField",
    "MASS_TOL",
    "MeasurementError",
    "MomentFields",
    "N_FLOOR",
    "NodeError",
    "NumericalError",
    "ParameterError",
    "ParticleParams",
    "PhaseSpaceField",
    "PhasewaveError",
    "Potential",
    "ResidualReport",
    "ResolutionWarning",
    "SpeedFit",
    "StructuralError",
    "ThermalParams",
    "UnwrapError",
    "WaveFunction",
    "action_functional",
    "action_to_phase_space",
    "cfl_limit",
    "coherence_defect",
    "damped_action_step",
    "evolve_action_wave",
    "field_energy",
    "fourier_k_to_p",
    "fourier_p_to_k",
    "fp_step",
    "functional_gradient_check",
    "gauge_invariance_check",
    "get_workers",
    "gibbs_state",
    "glauber_state",
    "hamiltonian_functional",
    "langevin_ensemble",
    "liouville_step",
    "madelung_decompose",
    "measure_wave_speed",
    "moment_step",
    "moments",
    "quartic_residual",
    "ramp_split",
    "run_acceptance",
    "set_workers",
    "slope_of",
    "smoluchowski_step",
    "symplectic_forms",
    "symplectic_identity_check",
    "tdse_step",
    "thermal_sound_evolve",
    "wave_energy",
    "wigner_transform",
]
