"""Spectral merger clustering of multichannel stationary time series.

Pipeline: estimate each channel's normalized spectral density with a
Parzen lag-window smoother, measure pairwise dissimilarity with total
variation distance, and merge clusters hierarchically, re-estimating the
merged spectrum at every step. The recorded merge costs give an elbow
rule for the number of clusters; epoch-wise runs aggregate into affinity
matrices for nonstationary recordings.
"""

from ._kernels import backend
from .cluster import (
    ALL_METHODS,
    CONCATENATE,
    SPECTRAL_AVERAGE,
    ClusterState,
    MergeStep,
    MergeStrategy,
    MergeTrace,
    benchmark_compare,
    complete_linkage,
    cut_trace,
    mean_cost_curve,
    select_k,
    smc_cluster,
)
from .distance import (
    Clustering,
    DissimilarityMatrix,
    d_lnp,
    d_np,
    d_skl,
    from_labels,
    pairwise_matrix,
    pairwise_tvd,
    sim_index,
    tvd,
    tvd_to_many,
)
from .epochs import (
    AffinityMatrix,
    EpochSet,
    Phase,
    PhaseResult,
    PhaseSegmentation,
    RepresentativeClustering,
    affinity,
    analyze_traces,
    cluster_epochs,
    phase_compare,
    representative_clustering,
)
from .errors import (
    DegenerateSpectrum,
    FormatError,
    GridMismatch,
    InvalidBandwidth,
    InvalidK,
    InvalidLag,
    InvalidSignal,
    LabelMismatch,
    NonCausal,
    NotNormalized,
    SpecmergeError,
    TooFewChannels,
    UnknownDesign,
)
from .simulate import (
    Ar2Params,
    LabeledCorpus,
    MixtureDesign,
    ar2_coefficients,
    builtin_designs,
    default_latents,
    dirichlet_rows,
    get_design,
    simulate_ar2,
    simulate_mixture,
)
from .spectral import (
    FREQUENCY_BANDS_HZ,
    AutocovarianceSeq,
    FrequencyGrid,
    Signal,
    SmoothingConfig,
    SpectralDensity,
    ar2_spectrum,
    autocovariance,
    estimate_normalized_spectrum,
    fourier_frequencies,
    gcv_select_bandwidth,
    normalize_density,
    parzen_weight,
    parzen_weights,
    periodogram,
    smoothed_periodogram,
    squared_coherence,
    uniform_grid,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
