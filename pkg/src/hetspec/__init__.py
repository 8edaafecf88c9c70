"""Quantum-noise power spectra of demodulated heterodyne photocurrents.

An analytic engine for the shot-noise spectral density of a photocurrent
produced by detecting an optical field with discrete classical components,
demodulated any number of times, with optionally squeezed vacuum, plus an
independent time-domain Monte Carlo estimator to validate it.
"""

from .errors import (
    AliasedScheme,
    BandwidthTooLarge,
    GridMismatch,
    HetspecError,
    MismatchedReference,
    NonPositivePower,
    OverlappingComponents,
    PartialOverlap,
    SchemeShapeError,
    SchemeValidationError,
    SqueezerNotCentered,
    TooShort,
    UnmatchedSqueezer,
    ZeroAmplitude,
)
from .fmatrix import (
    CoincidenceGroup,
    FrequencyMatrix,
    build_frequency_matrix,
    column_signs,
    demod_phase,
    group_entries,
)
from .model import (
    DEFAULT_COINCIDENCE_TOL_HZ,
    PLANCK_H,
    ClassicalComponent,
    DemodStage,
    DetectionConfig,
    Scheme,
    SqueezerSpec,
    validate_scheme,
)
from .oracle import (
    OracleConfig,
    OracleReport,
    auto_oracle_config,
    compare,
    estimate_psd,
    run_oracle,
    synthesize_current,
)
from .scheme_io import SchemeFile, load_scheme_file, parse_scheme_dict, scheme_to_dict
from .spectrum import (
    Contribution,
    EvalContext,
    PhaseOptimum,
    SpectrumResult,
    build_context,
    group_contribution,
    off_center_penalty,
    optimal_phases,
    total_spectrum,
    unique_contribution,
)
from .squeeze import (
    TransferSet,
    compose_transfers,
    identity_transfers,
    pure_squeeze_transfers,
)

__version__ = "0.1.0"
