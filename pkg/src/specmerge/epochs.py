"""Epoch-wise clustering, affinity aggregation, and phase comparison.

A recording split into equal-length epochs is clustered one epoch at a
time; cluster labels are arbitrary across epochs, so aggregation works
through the label-free affinity matrix (the proportion of epochs in
which two channels land in the same cluster). A representative
clustering is read off the affinity matrix with complete linkage, and
phases of the recording are compared through their mean cost curves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.signal

from .cluster import (
    CONCATENATE,
    MergeStrategy,
    MergeTrace,
    complete_linkage,
    cut_trace,
    mean_cost_curve,
    select_k,
    smc_cluster,
)
from .distance import Clustering, DissimilarityMatrix
from .errors import InvalidK, LabelMismatch
from .spectral import Signal, SmoothingConfig


@dataclass(frozen=True)
class EpochSet:
    """Equal-length epochs of a multichannel recording.

    data has shape (epochs, channels, samples). Labels default to
    positional names when not given.
    """

    data: np.ndarray
    sampling_rate: float
    channel_labels: tuple[str, ...] = ()

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 3:
            raise ValueError(f"epoch data must be 3-d, got shape {data.shape}")
        n_epochs, n_channels, _ = data.shape
        if n_epochs < 1 or n_channels < 2:
            raise ValueError("need at least 1 epoch and 2 channels")
        if not np.all(np.isfinite(data)):
            raise ValueError("epoch data must be finite")
        if not self.sampling_rate > 0:
            raise ValueError("sampling_rate must be > 0")
        labels = tuple(self.channel_labels) or tuple(
            f"ch{i}" for i in range(n_channels)
        )
        if len(labels) != n_channels or len(set(labels)) != n_channels:
            raise LabelMismatch("channel labels must be unique, one per channel")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "channel_labels", labels)

    @property
    def n_epochs(self) -> int:
        return self.data.shape[0]

    @property
    def n_channels(self) -> int:
        return self.data.shape[1]

    def epoch_signals(self, epoch: int) -> list[Signal]:
        """The channels of one epoch as Signal objects."""
        return [
            Signal(self.data[epoch, c], self.sampling_rate,
                   channel_id=self.channel_labels[c])
            for c in range(self.n_channels)
        ]

    def detrended(self) -> "EpochSet":
        """Per-epoch, per-channel linear detrend (preprocessing convenience)."""
        flat = scipy.signal.detrend(self.data, axis=-1, type="linear")
        return EpochSet(flat, self.sampling_rate, self.channel_labels)


@dataclass(frozen=True)
class AffinityMatrix:
    """Proportion of epochs in which channel pairs co-cluster."""

    entries: np.ndarray
    epoch_count: int
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.float64)
        n = entries.shape[0]
        if entries.shape != (n, n):
            raise ValueError("affinity entries must be square")
        if not np.array_equal(entries, entries.T):
            raise ValueError("affinity must be symmetric")
        if np.any(entries < 0.0) or np.any(entries > 1.0):
            raise ValueError("affinity entries must lie in [0, 1]")
        if not np.allclose(np.diag(entries), 1.0, rtol=0.0, atol=1e-12):
            raise ValueError("affinity diagonal must equal 1")
        if self.epoch_count < 1:
            raise ValueError("epoch_count must be >= 1")
        labels = tuple(self.labels) or tuple(f"ch{i}" for i in range(n))
        if len(labels) != n:
            raise LabelMismatch(f"expected {n} labels, got {len(labels)}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def to_dissimilarity(self) -> DissimilarityMatrix:
        values = 1.0 - self.entries
        np.fill_diagonal(values, 0.0)
        return DissimilarityMatrix(values=values, ids=self.labels)


@dataclass(frozen=True)
class Phase:
    """A named contiguous epoch range, 1-based inclusive."""

    name: str
    start: int
    end: int

    def __post_init__(self):
        if not self.name:
            raise ValueError("phase name must be non-empty")
        if not 1 <= self.start <= self.end:
            raise ValueError(
                f"phase {self.name!r} needs 1 <= start <= end, "
                f"got {self.start}..{self.end}"
            )

    def indices(self) -> range:
        """0-based epoch indices covered by the phase."""
        return range(self.start - 1, self.end)


@dataclass(frozen=True)
class PhaseSegmentation:
    """Named, pairwise-disjoint contiguous phases of a recording."""

    phases: tuple[Phase, ...]

    def __post_init__(self):
        phases = tuple(self.phases)
        if not phases:
            raise ValueError("need at least one phase")
        names = [p.name for p in phases]
        if len(set(names)) != len(names):
            raise ValueError("phase names must be unique")
        spans = sorted((p.start, p.end) for p in phases)
        for (s1, e1), (s2, _) in zip(spans, spans[1:]):
            if s2 <= e1:
                raise ValueError("phases must be pairwise disjoint")
        object.__setattr__(self, "phases", phases)

    def validate_for(self, n_epochs: int):
        for p in self.phases:
            if p.end > n_epochs:
                raise ValueError(
                    f"phase {p.name!r} ends at {p.end} but only "
                    f"{n_epochs} epochs exist"
                )


# -- Per-epoch clustering and aggregation -----------------------------------


def cluster_epochs(
    es: EpochSet,
    cfg: SmoothingConfig | None = None,
    strategy: MergeStrategy = CONCATENATE,
) -> list[MergeTrace]:
    """Run merger clustering independently on every epoch."""
    cfg = cfg or SmoothingConfig()
    return [
        smc_cluster(es.epoch_signals(e), cfg, strategy)
        for e in range(es.n_epochs)
    ]


def affinity(traces, k: int) -> AffinityMatrix:
    """Proportion of epochs in which each channel pair co-clusters at cut k."""
    traces = list(traces)
    if not traces:
        raise ValueError("need at least one trace")
    labels = traces[0].channel_ids
    n = len(labels)
    if not 1 <= k <= n:
        raise InvalidK(f"k must be in [1, {n}], got {k}")
    counts = np.zeros((n, n))
    for t in traces:
        if t.channel_ids != labels:
            raise LabelMismatch("traces must share one channel set, in order")
        lab = cut_trace(t, k).labels(labels)
        counts += lab[:, None] == lab[None, :]
    return AffinityMatrix(entries=counts / len(traces),
                          epoch_count=len(traces), labels=labels)


@dataclass(frozen=True)
class RepresentativeClustering:
    """Complete-linkage clustering of 1 - affinity, with per-cluster
    stability flags: stable means every within-cluster pair co-clustered
    in at least `threshold` of epochs."""

    clustering: Clustering
    stable: tuple[bool, ...]
    threshold: float

    def __post_init__(self):
        if len(self.stable) != self.clustering.n_clusters:
            raise ValueError("one stability flag per cluster")


def representative_clustering(
    am: AffinityMatrix, k: int, threshold: float = 0.5
) -> RepresentativeClustering:
    """Extract a representative k-clustering from an affinity matrix.

    The partition comes from complete linkage on dissimilarity
    1 - affinity; the threshold only drives the reported stability flags,
    it never reassigns channels.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    clustering = complete_linkage(am.to_dissimilarity(), k)
    index = {lab: i for i, lab in enumerate(am.labels)}
    flags = []
    for cluster in clustering.clusters:
        idx = [index[c] for c in cluster]
        block = am.entries[np.ix_(idx, idx)]
        flags.append(bool(np.all(block >= threshold)))
    return RepresentativeClustering(clustering=clustering,
                                    stable=tuple(flags), threshold=threshold)


# -- Phase comparison ---------------------------------------------------------


@dataclass(frozen=True)
class PhaseResult:
    """Per-phase analysis products."""

    name: str
    k_star: int
    mean_costs: np.ndarray
    affinity: AffinityMatrix
    representative: RepresentativeClustering


def analyze_traces(traces, tau: float = 0.01,
                   threshold: float = 0.5, name: str = "all") -> PhaseResult:
    """Aggregate a group of per-epoch traces into one PhaseResult:
    mean cost curve, elbow K*, affinity at K*, representative clustering."""
    traces = list(traces)
    curve = mean_cost_curve(traces)
    k_star = select_k(curve, tau)
    am = affinity(traces, k_star)
    rep = representative_clustering(am, k_star, threshold)
    return PhaseResult(name=name, k_star=k_star, mean_costs=curve,
                       affinity=am, representative=rep)


def phase_compare(
    es: EpochSet,
    seg: PhaseSegmentation,
    cfg: SmoothingConfig | None = None,
    strategy: MergeStrategy = CONCATENATE,
    tau: float = 0.01,
    threshold: float = 0.5,
) -> dict[str, PhaseResult]:
    """Cluster every epoch once, then analyze each phase's slice.

    A single phase covering all epochs reproduces the whole-recording
    analysis exactly, since phases reuse the same per-epoch traces.
    """
    seg.validate_for(es.n_epochs)
    traces = cluster_epochs(es, cfg, strategy)
    out = {}
    for phase in seg.phases:
        subset = [traces[i] for i in phase.indices()]
        out[phase.name] = analyze_traces(subset, tau, threshold, name=phase.name)
    return out
