"""Monotonicity testing over biased cubes and hypergrids via monotone embeddings.

A numpy/scipy library with exact rational cores: distance-to-monotonicity
oracles, local embeddings of product distributions into Boolean hypercubes,
fractional monotone matchings with Hall/shadow machinery, randomized
almost-perfect matchings, and lifted 2-query monotonicity testers.
"""

__version__ = "0.1.0"

from .distance import (
    DistanceCertificate,
    IsoperimetryReport,
    brute_force_distance,
    distance_to_monotone,
    isoperimetry_report,
    neg_sensitivity,
    sensitivity_mass_profile,
    talagrand_objective,
)
from .domain import (
    CountingOracle,
    CubeDomain,
    DenseBooleanFunction,
    DomainMismatchError,
    DomainTooLargeError,
    GridDomain,
    ProductMeasure,
    enumerate_slice,
    iter_monotone_functions,
    leq,
    random_function,
)
from .embeddings import (
    BiasApproximation,
    EmbeddingError,
    LiftedFunction,
    LocalEmbedding,
    OmegaEnum,
    ThresholdMap,
    and_embedding,
    approx_bias,
    best_threshold_map,
    complement_embedding,
    lift,
    product_embedding,
    symmetric_embedding,
    threshold_map_divergences,
    verify_embedding,
)
from .matchings import (
    AlmostPerfectMatching,
    FracMatching,
    HallWitness,
    KKRecord,
    LayeredPartition,
    MassMismatchError,
    MatchingError,
    PreconditionError,
    ShadowApproximator,
    SliceDominationParams,
    WeightFn,
    build_almost_perfect_matching,
    compose,
    coupling_drop_transform,
    frac_matching_solve,
    hall_condition_exhaustive,
    kk_check,
    lower_shadow,
    maximum_monotone_matching,
    mix,
    perfect_matching_from_frac,
    random_layered_partition,
    relaxed_embedding_from_apm,
    sample_slice_subset,
    search_perfect_embedding,
    slice_coupling,
    slice_domination_check,
    sparse_shadow_approximator,
    union_slice_match,
    upper_shadow,
)
from .testers import (
    PairTesterConfig,
    PipelineResult,
    RejectionProfile,
    TesterVerdict,
    cube_pair_trial,
    estimate_rejection,
    fit_polylog_exponent,
    hypergrid_pipeline,
    lifted_tester_trial,
    pbias_pipeline,
    rejection_reference,
    wilson_interval,
)
