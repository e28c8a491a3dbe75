"""Desk-scale workbench for the gap-Hamming-distance communication problem."""

__version__ = "0.1.0"

from .core import (
    STAR,
    BitString,
    CubePairLaw,
    CubeSet,
    DistanceLaw,
    GhdParams,
    binomial_tail_b,
    complement,
    distance_law,
    ghd_label,
    hamming_distance,
    sample_xi,
)
from .bounds import (
    CommMatrix,
    CorruptionCertificate,
    Rectangle,
    build_ghd_matrix,
    check_joker_inequality,
    corruption_lower_bound,
    discrepancy_scan,
    mass_on_rectangle,
    partition_slack_audit,
)
from .cubexform import (
    CubeInequalityReport,
    DistanceHistogram,
    cube_inequality_margin,
    disjoint_support_pair,
    distance_histogram,
    xi_measure,
    xor_convolution,
)
from .gauss import (
    EtaPairLaw,
    GaussSetPredicate,
    cosh_expectation_check,
    delta_orthogonality,
    gaussian_norm_concentration,
    kl_to_gaussian,
    mc_correlation_bound,
    projection_experiment,
    sample_eta_pair,
    sign_map,
    sign_map_inverse,
)
from .protocols import (
    ErrorEstimate,
    Protocol,
    Transcript,
    apply_reduction,
    error_by_distance_profile,
    estimate_error,
    hyperplane_gip_protocol,
    run_protocol,
    sampling_protocol,
    trivial_protocol,
)
from .streams import (
    KmvSketch,
    ReductionAccounting,
    ghd_to_f0_stream,
    kmv_f0,
    streaming_to_protocol,
)

__all__ = [
    "STAR",
    "BitString",
    "CubePairLaw",
    "CubeSet",
    "DistanceLaw",
    "GhdParams",
    "binomial_tail_b",
    "complement",
    "distance_law",
    "ghd_label",
    "hamming_distance",
    "sample_xi",
    "CubeInequalityReport",
    "DistanceHistogram",
    "cube_inequality_margin",
    "disjoint_support_pair",
    "distance_histogram",
    "xi_measure",
    "xor_convolution",
    "CommMatrix",
    "CorruptionCertificate",
    "Rectangle",
    "build_ghd_matrix",
    "check_joker_inequality",
    "corruption_lower_bound",
    "discrepancy_scan",
    "mass_on_rectangle",
    "partition_slack_audit",
    "EtaPairLaw",
    "GaussSetPredicate",
    "cosh_expectation_check",
    "delta_orthogonality",
    "gaussian_norm_concentration",
    "kl_to_gaussian",
    "mc_correlation_bound",
    "projection_experiment",
    "sample_eta_pair",
    "sign_map",
    "sign_map_inverse",
    "ErrorEstimate",
    "Protocol",
    "Transcript",
    "apply_reduction",
    "error_by_distance_profile",
    "estimate_error",
    "hyperplane_gip_protocol",
    "run_protocol",
    "sampling_protocol",
    "trivial_protocol",
    "KmvSketch",
    "ReductionAccounting",
    "ghd_to_f0_stream",
    "kmv_f0",
    "streaming_to_protocol",
]
