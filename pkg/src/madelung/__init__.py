"""Numerical laboratory for single-particle quantum hydrodynamics.

Solves Schrodinger eigenproblems, evolves band-limited superpositions,
decomposes wavefunctions into the full local energy ledger (quantum
potential, reduced quantum potential, flow/symmetric/classical kinetic
energies), classifies soft and hard superoscillation regions, and traces
fluid streamlines, nodes, and vortices.
"""

from .grids import (
    ComplexField,
    Grid1D,
    Grid2D,
    ScalarField,
    gradient,
    gradient2d,
    integrate,
    integrate_masked,
    laplacian,
)
from .spectral import (
    EigenBasis,
    Harmonic,
    InfiniteWell,
    QuarticDoubleWell,
    SymTridiag,
    Tabulated,
    WellWithBarrier,
    analytic_harmonic,
    analytic_infinite_well,
    build_hamiltonian,
    eigenbasis,
    load_basis,
    product_basis_2d,
    sample_potential,
    save_basis,
    snapped_barrier_width,
    solve_eigen,
)
from .states import (
    Superposition,
    WavepacketSpec,
    band_limit,
    calibrate_sigma,
    cap_modes,
    equal_two_mode,
    evaluate,
    evaluate_along,
    evaluate_at,
    evaluate_at_2d,
    evaluate_at_dt,
    evaluate_at_dx,
    evaluate_at_grad_2d,
    gaussian_values,
    leaked_norm,
    project_field,
    project_gaussian,
    superposition,
    superposition_from_json,
    superposition_to_json,
    time_derivative,
)
from .energy import (
    EnergyDecomposition,
    MadelungFields,
    SuperoscillationMask,
    classify_superoscillation,
    continuity_residual,
    decompose,
    decomposition_to_csv,
    energy_decomposition,
    hj_residual,
    ledger_integrals,
    mask_area,
    masks_to_csv,
    polar_fields,
)
from .flow import (
    Loop2D,
    NodeEvent,
    Streamline,
    VortexProfile,
    circulation,
    cumulative_probability,
    find_nodes,
    integrate_loop_2d,
    integrate_streamline,
    loop_seeds_on_axis,
    loops_to_csv,
    node_events_to_json,
    quantile_position,
    save_node_events,
    seed_quantiles,
    streamline_bundle,
    streamlines_to_csv,
    vortex_profile,
    vortex_profile_to_csv,
)
from .scenarios import (
    SCENARIOS,
    ScenarioBundle,
    ScenarioConfig,
    SplitterGeometry,
    TuningResult,
    build_scenario,
    default_config,
    load_config,
    run_scenario,
    save_config,
    transmission,
    tune_beam_splitter,
)

__version__ = "0.1.0"

__all__ = [
    "ComplexField",
    "Grid1D",
    "Grid2D",
    "ScalarField",
    "gradient",
    "gradient2d",
    "integrate",
    "integrate_masked",
    "laplacian",
    "EigenBasis",
    "Harmonic",
    "InfiniteWell",
    "QuarticDoubleWell",
    "SymTridiag",
    "Tabulated",
    "WellWithBarrier",
    "analytic_harmonic",
    "analytic_infinite_well",
    "build_hamiltonian",
    "eigenbasis",
    "load_basis",
    "product_basis_2d",
    "sample_potential",
    "save_basis",
    "snapped_barrier_width",
    "solve_eigen",
    "Superposition",
    "WavepacketSpec",
    "band_limit",
    "calibrate_sigma",
    "cap_modes",
    "equal_two_mode",
    "evaluate",
    "evaluate_along",
    "evaluate_at",
    "evaluate_at_2d",
    "evaluate_at_dt",
    "evaluate_at_dx",
    "evaluate_at_grad_2d",
    "gaussian_values",
    "leaked_norm",
    "project_field",
    "project_gaussian",
    "superposition",
    "superposition_from_json",
    "superposition_to_json",
    "time_derivative",
    "EnergyDecomposition",
    "MadelungFields",
    "SuperoscillationMask",
    "classify_superoscillation",
    "continuity_residual",
    "decompose",
    "decomposition_to_csv",
    "energy_decomposition",
    "hj_residual",
    "ledger_integrals",
    "mask_area",
    "masks_to_csv",
    "polar_fields",
    "Loop2D",
    "NodeEvent",
    "Streamline",
    "VortexProfile",
    "circulation",
    "cumulative_probability",
    "find_nodes",
    "integrate_loop_2d",
    "integrate_streamline",
    "loop_seeds_on_axis",
    "loops_to_csv",
    "node_events_to_json",
    "quantile_position",
    "save_node_events",
    "seed_quantiles",
    "streamline_bundle",
    "streamlines_to_csv",
    "vortex_profile",
    "vortex_profile_to_csv",
    "SCENARIOS",
    "ScenarioBundle",
    "ScenarioConfig",
    "SplitterGeometry",
    "TuningResult",
    "build_scenario",
    "default_config",
    "load_config",
    "run_scenario",
    "save_config",
    "transmission",
    "tune_beam_splitter",
    "__version__",
]
