"""Reconstruction on d-ary trees for the 2q-state two-category
symmetric channel: exact moment oracles, Monte Carlo / population
dynamics estimators, closed-form expansions and the truncated
second-order map used to probe the Kesten-Stigum bound."""

from .channel import (
    ChannelParams,
    DistanceEntries,
    KSReport,
    Spectrum,
    build_matrix,
    distance_entries,
    ks_check,
    params_from_eigenvalues,
    spectrum,
    symmetry_permutation,
)
from .broadcast import (
    TreeShape,
    bp_combine,
    broadcast_sample,
    posterior_root,
)
from .exact import (
    CrossMoments,
    MomentStats,
    ZMoments,
    exact_cross_moments,
    exact_moments,
    exact_z_moments,
)
from .formulas import (
    MapCoefficients,
    YMomentSet,
    ZExpansionSet,
    map_coefficients,
    y_moments,
    z_expansions,
)
from .dynsys import (
    Classification,
    DynState,
    Trajectory,
    escape_threshold,
    fixed_points,
    iterate_classify,
    jacobian_origin,
    step,
)
from .popdyn import (
    Population,
    Verdict,
    classify_series,
    concentration_diagnostics,
    estimate_moments,
    evolve_level,
    init_population,
    mc_tree_moments,
    run_series,
    survival_threshold,
)
from .errors import BracketError, CapacityError, TreeBroadcastError, ValidationError

__version__ = "0.1.0"
