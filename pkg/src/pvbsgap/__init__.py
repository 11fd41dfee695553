"""Spectral gaps and gap certificates for single-species PVBS models.

The package constructs the XXZ-type PVBS Hamiltonian on finite subsets of
Z^d, computes spectral gaps exactly in particle-number sectors, composes
martingale-method lower bounds with the variational upper bound into
machine-checkable certificates `lower <= gamma <= upper`, and reproduces the
edge-driven gap collapse as the boundary normal approaches -log(lambda).
"""

from .errors import (
    AllZero,
    CaseMismatch,
    DegenerateNormal,
    DimensionMismatch,
    DisconnectedVolume,
    EmptyRegion,
    GaplessBulk,
    GaplessDirection,
    HypothesisViolated,
    InvalidDirection,
    NoFeasibleEll,
    PvbsError,
    RegionTooLarge,
    SectorTooLarge,
    SolverFailure,
    StageOutOfRange,
    TildeLambdaUnity,
    UndefinedAngle,
    ZeroNormal,
)
from .geometry import (
    EXPLICIT,
    HALF_SPACE_SLAB,
    PARALLELOGRAM,
    PARALLELOTOPE,
    TRAPEZOID,
    CaseInfo,
    Filtration,
    ModelParams,
    Region,
    RegionSpec,
    build_filtration,
    build_region,
    classify_case,
    connectivity_threshold,
    explicit_region,
    filtration_from_specs,
    is_connected,
    normal_frac,
    points_csv,
    spec_from_json,
    spec_to_json,
)
from .martingale import (
    BoundCertificate,
    EpsilonRecord,
    base_gap,
    certify_bulk,
    certify_lower_bound,
    epsilon_bruteforce,
    epsilon_closed_form,
    epsilon_exact,
    f_decay,
    f_envelope,
    select_ell,
)
from .operator import (
    OccupationBasis,
    SectorOperator,
    apply_operator,
    assemble_sector,
    interaction_matrix,
    kernel_dimension,
    write_matrix_market,
)
from .spectra import GapResult, sector_gap, spectral_gap
from .variational import (
    UpperBoundResult,
    angle_theta,
    c_of,
    closed_form_upper_bound,
    finite_size_upper_bound,
    theta_sweep,
    trial_state_energy,
)
from .weights import (
    GroundStateVector,
    log_normalization,
    log_weight,
    normalization_closed_form,
    one_particle_ground_state,
)

__version__ = "0.1.0"
