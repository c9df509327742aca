"""Random traces of networks of synchronized alphabets."""

from .errors import InconclusiveError, InputError, ResourceError, StateError, TraceSyncError
from .models import figure_monoid, free_commutative, free_monoid, path_network, ring_network, star_network
from .moebius import (
    Polynomial,
    Valuation,
    ValuationClass,
    classify_valuation,
    extend_valuation,
    factored_transform,
    growth_coefficients,
    is_irreducible,
    moebius_polynomial,
    moebius_transform,
    multivariate_eval,
    restrict_valuation,
    smallest_root,
)
from .pfsa import PfsaConfig, first_hitting, naive_walk, pfsa_generate, sample_increments, sample_pyramidal
from .rng import RandomStream
from .sampler import DistKind, LocalDistribution, PsaClass, classify_psa, psa_batch, psa_run, psa_valuation
from .solver import (
    UnsupportedTopology,
    scale_small_values,
    solve,
    solve_path_bernoulli,
    solve_path_sub_bernoulli,
    solve_ring,
)
from .stats import (
    NaiveSource,
    PfsaSource,
    PsaSource,
    estimate_cylinder,
    estimate_mean_length,
    fit_first_hitting,
    two_sample_chi2,
)
from .sync import AlphabetNetwork, SyncState, SyncTag, WordVector, stream_synchronize, synchronize
from .traces import EMPTY, Trace, TraceMonoid, concat, enumerate_traces, normalize

__version__ = "0.1.0"
