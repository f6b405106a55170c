from ._bands import (
    BandStructure,
    GapInfo,
    GuidedCrossing,
    NgPeak,
    Parity,
    Provenance,
    bulk_k_path,
    classify_parity,
    coefficient_parity,
    dual_mode_window,
    find_bandgap,
    group_index,
    group_index_curve,
    guided_mode_at_wavelength,
    localization,
    ng_peak_report,
    track_bands,
)
from ._config import AnalysisConfig, BudgetConfig, DeviceConfig, RunConfig, SolverConfig
from ._emitter import (
    CutlineProfile,
    EmitterMaps,
    ImpurityParams,
    MapSummary,
    MonteCarloFractions,
    area_fraction,
    beta_map,
    compute_emitter_maps,
    cutline_profile,
    effective_area_mask,
    impurity_map,
    monte_carlo_fractions,
    normalize_mode,
    purcell_factor,
    purcell_map,
    summarize_maps,
    working_area,
)
from ._errors import (
    AsymmetricGeometry,
    BasisTooLarge,
    BasisTooSmall,
    ConfigError,
    EigSolveFailure,
    EmptyMask,
    FlatBand,
    InvalidParameter,
    NoGap,
    NoGuidedMode,
    NoneFound,
    OverlappingHoles,
    PcwError,
    SingularEpsilon,
    TrackingAmbiguity,
    ZeroField,
)
from ._geometry import (
    Hole,
    LatticeSpec,
    SlabSpec,
    SupercellGeometry,
    WaveguideParams,
    build_bulk_cell,
    build_waveguide_cell,
    dual_mode_params,
    membrane_lattice,
    mode_filter_params,
    permittivity_at,
    slab_mode_height,
    slab_te_effective_index,
    w1_params,
)
from ._pipeline import (
    BudgetInputs,
    EmitterYield,
    SourceBudget,
    compute_budget,
    emitter_yield,
    eta_from_db,
    eta_to_db,
    required_beta2,
    single_interface_from_two_port,
)
from ._pwe import (
    ModeField,
    PlaneWaveBasis,
    TESolver,
    assemble_te_operator,
    build_basis,
    evaluate_field,
    reconstruct_field,
    solve_bands,
)
from ._version import version

#: semantic version of the project
__version__ = version

__all__ = [
    "__version__",
    # geometry
    "LatticeSpec",
    "WaveguideParams",
    "Hole",
    "SupercellGeometry",
    "SlabSpec",
    "slab_te_effective_index",
    "slab_mode_height",
    "membrane_lattice",
    "build_bulk_cell",
    "build_waveguide_cell",
    "w1_params",
    "dual_mode_params",
    "mode_filter_params",
    "permittivity_at",
    # plane-wave solver
    "PlaneWaveBasis",
    "ModeField",
    "TESolver",
    "build_basis",
    "assemble_te_operator",
    "solve_bands",
    "reconstruct_field",
    "evaluate_field",
    # band analysis
    "Parity",
    "Provenance",
    "GapInfo",
    "BandStructure",
    "GuidedCrossing",
    "NgPeak",
    "bulk_k_path",
    "find_bandgap",
    "classify_parity",
    "coefficient_parity",
    "localization",
    "track_bands",
    "group_index",
    "group_index_curve",
    "guided_mode_at_wavelength",
    "dual_mode_window",
    "ng_peak_report",
    # emitter maps
    "ImpurityParams",
    "EmitterMaps",
    "MapSummary",
    "CutlineProfile",
    "MonteCarloFractions",
    "normalize_mode",
    "purcell_factor",
    "purcell_map",
    "beta_map",
    "effective_area_mask",
    "area_fraction",
    "impurity_map",
    "working_area",
    "compute_emitter_maps",
    "summarize_maps",
    "cutline_profile",
    "monte_carlo_fractions",
    # source budget
    "BudgetInputs",
    "SourceBudget",
    "EmitterYield",
    "compute_budget",
    "single_interface_from_two_port",
    "eta_from_db",
    "eta_to_db",
    "required_beta2",
    "emitter_yield",
    # configuration
    "RunConfig",
    "DeviceConfig",
    "SolverConfig",
    "AnalysisConfig",
    "BudgetConfig",
    # errors
    "PcwError",
    "InvalidParameter",
    "ConfigError",
    "NoGuidedMode",
    "OverlappingHoles",
    "BasisTooLarge",
    "BasisTooSmall",
    "SingularEpsilon",
    "EigSolveFailure",
    "NoGap",
    "AsymmetricGeometry",
    "NoneFound",
    "ZeroField",
    "EmptyMask",
    "TrackingAmbiguity",
    "FlatBand",
]
