"""Spectral solvers and phase diagnostics for dispersive propagation through
highly oscillatory potentials."""

from ._kernels import active_backend_name
from .harness import (
    CellFailure,
    ErrorRecord,
    RateFit,
    SweepConfig,
    SweepResult,
    compare_methods,
    convergence_sweep,
    error_normalizer,
    error_x,
    fit_rate,
    regularity_normalizer,
    regularity_sweep,
    splitting_threshold,
)
from .integrators import (
    NumericalBlowupError,
    PrecomputedStep,
    SolveConfig,
    SolveResult,
    StepperKind,
    free_solution,
    lri_filter_rescaled,
    precompute,
    solve,
    step_ei,
    step_lri,
    step_lt,
    step_strang,
)
from .model import (
    DegenerateReductionError,
    DispersiveModel,
    PhaseBoundReport,
    ReducedModel,
    RegularityExponent,
    eval_p,
    eval_phase,
    eval_phase_factored,
    eval_phase_scaled,
    eval_q,
    expected_error_exponent,
    expected_regularity_exponent,
    reduce_moment,
    reduced_to_model,
    search_lower_bound_constant,
    verify_phase_lower_bound,
)
from .presets import PRESETS, Preset, get_preset
from .spectral import (
    Grid,
    InitialDataSpec,
    MeshResolutionError,
    MeshResolutionWarning,
    PotentialSpec,
    SpectralField,
    apply_multiplier,
    free_propagator_symbol,
    phi1,
    sample_initial,
    sample_potential,
    to_frequency,
    to_physical,
    twist,
    x_norm,
)

__version__ = "0.1.0"
