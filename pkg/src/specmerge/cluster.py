"""Hierarchical merger clustering on total variation distance.

smc_cluster runs the merger algorithm: start from singleton clusters
with normalized smoothed periodograms, repeatedly merge the closest pair
under TVD, and re-estimate the merged cluster's density. The recorded
minimum TVD per merge forms the cost curve c(K) used by select_k to pick
a cluster count. complete_linkage is the classical agglomerative
baseline used in benchmarks, and benchmark_compare scores both against
ground truth across simulated draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .distance import (
    Clustering,
    DissimilarityMatrix,
    pairwise_matrix,
    sim_index,
)
from .errors import GridMismatch, InvalidK, InvalidSignal, TooFewChannels
from .spectral import (
    Signal,
    SmoothingConfig,
    SpectralDensity,
    estimate_normalized_spectrum,
    normalize_density,
)

_STRATEGY_KINDS = ("concatenate", "spectral_average")


@dataclass(frozen=True)
class MergeStrategy:
    """How a merged cluster's density is re-estimated.

    concatenate: smooth the periodogram of the member series joined end
    to end (ascending original channel index), same bandwidth.
    spectral_average: member-count-weighted mean of the member channels'
    densities, renormalized.
    """

    kind: str = "concatenate"

    def __post_init__(self):
        if self.kind not in _STRATEGY_KINDS:
            raise ValueError(
                f"strategy must be one of {_STRATEGY_KINDS}, got {self.kind!r}"
            )


CONCATENATE = MergeStrategy("concatenate")
SPECTRAL_AVERAGE = MergeStrategy("spectral_average")


@dataclass(frozen=True)
class ClusterState:
    """One live cluster: member channel indices, current density, and the
    member signals (kept only under the concatenate strategy)."""

    members: frozenset
    density: SpectralDensity
    signals: tuple[Signal, ...] | None = None

    def __post_init__(self):
        if not self.members:
            raise ValueError("cluster members must be non-empty")
        if not self.density.normalized:
            raise ValueError("cluster density must be normalized")


@dataclass(frozen=True)
class MergeStep:
    """One merge: the pair of cluster ids joined, the TVD paid, and the
    resulting member set. Cluster ids are the minimum original channel
    index of their members, so the merged cluster keeps id pair[0]."""

    k_before: int
    pair: tuple[int, int]
    cost: float
    members: frozenset


@dataclass(frozen=True)
class MergeTrace:
    """Full record of a merger-clustering run on n channels.

    steps: the n-1 merges in order. costs[k-1] = c(k), the TVD consumed
    by the merge that left k clusters, for k = 1..n-1.
    """

    channel_ids: tuple[str, ...]
    steps: tuple[MergeStep, ...]
    costs: np.ndarray

    def __post_init__(self):
        n = len(self.channel_ids)
        if len(self.steps) != n - 1:
            raise ValueError(f"expected {n - 1} steps for {n} channels")
        costs = np.array(self.costs, dtype=np.float64)
        if costs.shape != (n - 1,):
            raise ValueError("costs must hold c(1)..c(n-1)")
        if np.any(costs < -1e-12) or np.any(costs > 1.0 + 1e-12):
            raise ValueError("merge costs must lie in [0, 1]")
        costs.setflags(write=False)
        object.__setattr__(self, "costs", costs)

    @property
    def n_channels(self) -> int:
        return len(self.channel_ids)

    def cost_curve(self) -> tuple[np.ndarray, np.ndarray]:
        """(K values 1..n-1, c(K)) ready for plotting or select_k."""
        return np.arange(1, self.n_channels), self.costs


def _channel_labels(signals) -> tuple[str, ...]:
    ids = tuple(s.channel_id for s in signals)
    if all(ids) and len(set(ids)) == len(ids):
        return ids
    return tuple(f"ch{i}" for i in range(len(signals)))


def _merged_density(members, signals, states, pair, strategy, cfg):
    if strategy.kind == "concatenate":
        samples = np.concatenate([signals[i].samples for i in sorted(members)])
        joined = Signal(samples, signals[0].sampling_rate, channel_id="")
        return estimate_normalized_spectrum(joined, cfg)
    a, b = pair
    na, nb = len(states[a].members), len(states[b].members)
    mixed = (na * states[a].density.values + nb * states[b].density.values) / (na + nb)
    return normalize_density(
        SpectralDensity(grid=states[a].density.grid, values=mixed)
    )


def _argmin_pair(dist: np.ndarray, active: list) -> tuple[int, int]:
    # Row-major argmin over the upper triangle gives the lexicographically
    # smallest (i, j) among ties; active is kept sorted so position order
    # equals cluster-id order.
    sub = dist[np.ix_(active, active)]
    sub[np.tril_indices(len(active))] = np.inf
    flat = int(np.argmin(sub))
    pi, pj = divmod(flat, len(active))
    return pi, pj


def smc_cluster(
    signals,
    cfg: SmoothingConfig | None = None,
    strategy: MergeStrategy = CONCATENATE,
) -> MergeTrace:
    """Run the hierarchical merger algorithm over a set of channels.

    Channels must share a sampling rate; the spectral_average strategy
    additionally requires equal lengths (its weights count member
    channels, which only pools like with like). Ties in the minimum TVD
    break toward the lexicographically smallest cluster-id pair.
    """
    signals = list(signals)
    if len(signals) < 2:
        raise TooFewChannels(f"need at least 2 channels, got {len(signals)}")
    rates = {s.sampling_rate for s in signals}
    if len(rates) != 1:
        raise GridMismatch(f"channels must share one sampling rate, got {rates}")
    if strategy.kind == "spectral_average":
        lengths = {len(s) for s in signals}
        if len(lengths) != 1:
            raise InvalidSignal(
                "spectral_average requires equal-length channels"
            )
    cfg = cfg or SmoothingConfig()
    labels = _channel_labels(signals)
    n = len(signals)
    keep_signals = strategy.kind == "concatenate"

    states: dict[int, ClusterState] = {}
    for i, s in enumerate(signals):
        states[i] = ClusterState(
            members=frozenset([i]),
            density=estimate_normalized_spectrum(s, cfg),
            signals=(s,) if keep_signals else None,
        )

    grid = cfg.grid()
    dens = np.ascontiguousarray([states[i].density.values for i in range(n)])
    dist = np.array(_kernels.tvd_matrix(dens, grid.spacing), dtype=np.float64)

    active = list(range(n))
    steps = []
    costs = np.empty(n - 1)
    while len(active) > 1:
        pi, pj = _argmin_pair(dist, active)
        a, b = active[pi], active[pj]
        cost = float(dist[a, b])
        members = states[a].members | states[b].members
        density = _merged_density(members, signals, states, (a, b), strategy, cfg)
        states[a] = ClusterState(
            members=members,
            density=density,
            signals=tuple(signals[i] for i in sorted(members)) if keep_signals else None,
        )
        del states[b]
        active.pop(pj)

        k_after = len(active)
        steps.append(MergeStep(k_before=k_after + 1, pair=(a, b), cost=cost,
                               members=members))
        costs[k_after - 1] = cost

        survivors = [c for c in active if c != a]
        if survivors:
            stack = np.ascontiguousarray([states[c].density.values for c in survivors])
            row = _kernels.tvd_vec(density.values, stack, grid.spacing)
            for c, v in zip(survivors, row):
                dist[a, c] = dist[c, a] = v

    return MergeTrace(channel_ids=labels, steps=tuple(steps), costs=costs)


def cut_trace(trace: MergeTrace, k: int) -> Clustering:
    """The partition that existed when exactly k clusters remained."""
    n = trace.n_channels
    if not 1 <= k <= n:
        raise InvalidK(f"k must be in [1, {n}], got {k}")
    parts = {i: frozenset([i]) for i in range(n)}
    for step in trace.steps:
        if len(parts) == k:
            break
        a, b = step.pair
        parts[a] = parts[a] | parts[b]
        del parts[b]
    return Clustering(
        tuple(
            frozenset(trace.channel_ids[i] for i in mem)
            for mem in parts.values()
        )
    )


# -- Cluster-count selection -------------------------------------------------


def mean_cost_curve(costs) -> np.ndarray:
    """Coerce a trace, a c(K) array, or a collection of either into one
    cost curve; collections are averaged elementwise."""
    if isinstance(costs, MergeTrace):
        return costs.costs
    if isinstance(costs, np.ndarray) and costs.ndim == 1:
        return costs.astype(np.float64)
    seq = list(costs)
    if not seq:
        raise ValueError("empty cost input")
    if all(isinstance(c, (int, float, np.floating, np.integer)) for c in seq):
        return np.array(seq, dtype=np.float64)
    curves = [mean_cost_curve(c) for c in seq]
    lengths = {c.size for c in curves}
    if len(lengths) != 1:
        raise ValueError("cost curves must have equal lengths to average")
    return np.mean(curves, axis=0)


def select_k(costs, tau: float = 0.01) -> int:
    """Elbow rule on the merge-cost curve.

    With delta(K) = c(K) - c(K+1), returns the smallest K >= 1 whose drop
    is strictly below tau; if no drop qualifies, returns N-1 (every merge
    mattered). Multi-trace input is averaged into a mean curve first.
    """
    if not tau > 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    curve = mean_cost_curve(costs)
    deltas = curve[:-1] - curve[1:]
    for idx, d in enumerate(deltas):
        if d < tau:
            return idx + 1
    return curve.size


# -- Complete-linkage baseline -------------------------------------------------


def complete_linkage(matrix: DissimilarityMatrix, k: int) -> Clustering:
    """Agglomerative clustering with max-linkage merge distances.

    Deterministic: ties in the minimum inter-cluster distance break
    toward the lexicographically smallest cluster-id pair, where a
    cluster's id is the smallest original index it contains.
    """
    n = matrix.size
    if not 1 <= k <= n:
        raise InvalidK(f"k must be in [1, {n}], got {k}")
    members = {i: frozenset([i]) for i in range(n)}
    dist = matrix.values.astype(np.float64).copy()
    np.fill_diagonal(dist, np.inf)
    active = list(range(n))
    while len(active) > k:
        pi, pj = _argmin_pair(dist, active)
        a, b = active[pi], active[pj]
        members[a] = members[a] | members[b]
        del members[b]
        active.pop(pj)
        for c in active:
            if c == a:
                continue
            v = max(dist[a, c], dist[b, c])
            dist[a, c] = dist[c, a] = v
    return Clustering(
        tuple(
            frozenset(matrix.ids[i] for i in mem)
            for mem in members.values()
        )
    )


# -- Benchmark harness --------------------------------------------------------


ALL_METHODS = ("smc_tvd", "complete_dnp", "complete_dlnp", "complete_dskl")

_BASELINE_MEASURES = {
    "complete_dnp": "np",
    "complete_dlnp": "lnp",
    "complete_dskl": "skl",
}


def benchmark_compare(
    draws,
    k: int,
    cfg: SmoothingConfig | None = None,
    strategy: MergeStrategy = CONCATENATE,
    methods=None,
) -> dict[str, np.ndarray]:
    """Score SMC and the complete-linkage baselines across labeled draws.

    Every method clusters each draw's channels at the true count k; the
    returned arrays hold sim_index values against the embedded truth, one
    per draw, keyed by method name. methods restricts the work to a
    subset of ALL_METHODS (default: all four).
    """
    cfg = cfg or SmoothingConfig()
    methods = tuple(methods) if methods is not None else ALL_METHODS
    unknown = set(methods) - set(ALL_METHODS)
    if unknown:
        raise ValueError(f"unknown methods: {sorted(unknown)}")
    out: dict[str, list] = {name: [] for name in methods}
    for corpus in draws:
        ids = [s.channel_id for s in corpus.signals]
        if "smc_tvd" in out:
            trace = smc_cluster(corpus.signals, cfg, strategy)
            out["smc_tvd"].append(sim_index(corpus.truth, cut_trace(trace, k)))
        baselines = [m for m in methods if m != "smc_tvd"]
        if baselines:
            dens = [estimate_normalized_spectrum(s, cfg) for s in corpus.signals]
            for name in baselines:
                matrix = pairwise_matrix(dens, _BASELINE_MEASURES[name], ids)
                cand = complete_linkage(matrix, k)
                out[name].append(sim_index(corpus.truth, cand))
    return {name: np.array(vals) for name, vals in out.items()}
