"""Dissimilarity measures between spectral densities, and clustering
quality scoring.

The primary measure is total variation distance between normalized
densities; d_np, d_lnp and symmetric Kullback-Leibler are baselines kept
for benchmarking. sim_index scores a recovered clustering against ground
truth labels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import GridMismatch, LabelMismatch, NotNormalized
from .spectral import FrequencyGrid, SpectralDensity

#: Relative floor applied to density values before taking logs.
LOG_FLOOR_REL = 1e-12


def _check_same_grid(f: SpectralDensity, g: SpectralDensity):
    if not f.grid.matches(g.grid):
        raise GridMismatch("densities live on different frequency grids")


def _check_normalized(*densities: SpectralDensity):
    for d in densities:
        if not d.normalized:
            raise NotNormalized("total variation distance needs normalized densities")


def tvd(f: SpectralDensity, g: SpectralDensity) -> float:
    """Total variation distance between two normalized densities.

    1 - sum_j min(f_j, g_j) * dw, clamped into [0, 1]. Zero iff the
    densities coincide on the grid; symmetric; for unit-integral
    densities equals half the discrete L1 distance.
    """
    _check_same_grid(f, g)
    _check_normalized(f, g)
    overlap = float(np.minimum(f.values, g.values).sum() * f.grid.spacing)
    return min(max(1.0 - overlap, 0.0), 1.0)


def _values(f) -> np.ndarray:
    if isinstance(f, SpectralDensity):
        return f.values
    return np.asarray(f, dtype=np.float64)


def d_np(f, g) -> float:
    """Normalized-periodogram distance: rms difference divided by sqrt(n).

    (1/n) * sqrt(sum (f_j - g_j)^2). Accepts densities on a shared grid
    or plain value arrays.
    """
    fv, gv = _values(f), _values(g)
    if isinstance(f, SpectralDensity) and isinstance(g, SpectralDensity):
        _check_same_grid(f, g)
    if fv.shape != gv.shape:
        raise GridMismatch("d_np inputs must have equal lengths")
    n = fv.size
    return float(np.sqrt(np.sum((fv - gv) ** 2)) / n)


def d_lnp(f, g) -> float:
    """Log-spectrum distance: like d_np but on log values.

    Values are floored at LOG_FLOOR_REL times the pairwise maximum before
    the log so empty bins stay finite.
    """
    fv, gv = _values(f), _values(g)
    if isinstance(f, SpectralDensity) and isinstance(g, SpectralDensity):
        _check_same_grid(f, g)
    if fv.shape != gv.shape:
        raise GridMismatch("d_lnp inputs must have equal lengths")
    floor = LOG_FLOOR_REL * max(fv.max(), gv.max(), 0.0)
    if floor <= 0.0:
        floor = LOG_FLOOR_REL
    lf = np.log(np.maximum(fv, floor))
    lg = np.log(np.maximum(gv, floor))
    n = fv.size
    return float(np.sqrt(np.sum((lf - lg) ** 2)) / n)


def d_skl(f: SpectralDensity, g: SpectralDensity) -> float:
    """Symmetric Kullback-Leibler divergence between normalized densities.

    sum f log(f/g) dw + sum g log(g/f) dw with the same relative floor as
    d_lnp. Nonnegative and symmetric, but not a metric.
    """
    _check_same_grid(f, g)
    _check_normalized(f, g)
    fv, gv = f.values, g.values
    floor = LOG_FLOOR_REL * max(fv.max(), gv.max())
    fv = np.maximum(fv, floor)
    gv = np.maximum(gv, floor)
    lr = np.log(fv) - np.log(gv)
    dw = f.grid.spacing
    return float((fv @ lr) * dw - (gv @ lr) * dw)


# -- Pairwise matrices -----------------------------------------------------


@dataclass(frozen=True)
class DissimilarityMatrix:
    """Symmetric nonnegative dissimilarity matrix with zero diagonal."""

    values: np.ndarray
    ids: tuple[str, ...]

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        n = len(self.ids)
        if v.shape != (n, n):
            raise ValueError(f"matrix shape {v.shape} does not match {n} ids")
        if not np.all(np.isfinite(v)):
            raise ValueError("dissimilarities must be finite")
        if np.any(v < 0.0) or np.any(np.abs(np.diag(v)) > 1e-12):
            raise ValueError("need nonnegative entries and a zero diagonal")
        if not np.array_equal(v, v.T):
            raise ValueError("dissimilarity matrix must be symmetric")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return len(self.ids)


def _stack_densities(densities) -> tuple[np.ndarray, FrequencyGrid]:
    densities = list(densities)
    if not densities:
        raise ValueError("need at least 1 density for a pairwise matrix")
    grid = densities[0].grid
    for d in densities[1:]:
        if not grid.matches(d.grid):
            raise GridMismatch("densities live on different frequency grids")
    _check_normalized(*densities)
    return np.ascontiguousarray([d.values for d in densities]), grid


def pairwise_tvd(densities, ids=None) -> DissimilarityMatrix:
    """All-pairs total variation distances as a DissimilarityMatrix."""
    dens, grid = _stack_densities(densities)
    if ids is None:
        ids = tuple(str(i) for i in range(dens.shape[0]))
    mat = _kernels.tvd_matrix(dens, grid.spacing)
    # Enforce exact symmetry; the kernel writes both triangles from one pass.
    return DissimilarityMatrix(values=mat, ids=tuple(ids))


def tvd_to_many(f: SpectralDensity, densities) -> np.ndarray:
    """TVD from one density to each of a family, as a vector."""
    dens, grid = _stack_densities([f] + list(densities))
    return _kernels.tvd_vec(dens[0], dens[1:], grid.spacing)


_PAIRWISE_MEASURES = {"np": d_np, "lnp": d_lnp, "skl": d_skl}


def pairwise_matrix(densities, measure: str = "tvd", ids=None) -> DissimilarityMatrix:
    """All-pairs dissimilarities under one of the shipped measures.

    measure is "tvd", "np", "lnp", or "skl". Densities must share one
    grid; tvd and skl additionally require normalized inputs.
    """
    if measure == "tvd":
        return pairwise_tvd(densities, ids=ids)
    if measure not in _PAIRWISE_MEASURES:
        raise ValueError(
            f"unknown measure {measure!r}; choose one of tvd, np, lnp, skl")
    fn = _PAIRWISE_MEASURES[measure]
    densities = list(densities)
    if not densities:
        raise ValueError("need at least 1 density for a pairwise matrix")
    if ids is None:
        ids = tuple(str(i) for i in range(len(densities)))
    n = len(densities)
    mat = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            mat[i, j] = mat[j, i] = fn(densities[i], densities[j])
    return DissimilarityMatrix(values=mat, ids=tuple(ids))


# -- Clustering quality ----------------------------------------------------


@dataclass(frozen=True)
class Clustering:
    """A partition of item ids into disjoint non-empty clusters."""

    clusters: tuple[frozenset, ...]

    def __post_init__(self):
        clusters = tuple(frozenset(c) for c in self.clusters)
        if not clusters or any(len(c) == 0 for c in clusters):
            raise ValueError("clusters must be non-empty")
        total = sum(len(c) for c in clusters)
        universe = frozenset().union(*clusters)
        if total != len(universe):
            raise ValueError("clusters must be pairwise disjoint")
        object.__setattr__(self, "clusters", clusters)

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    @property
    def items(self) -> frozenset:
        return frozenset().union(*self.clusters)

    def labels(self, order) -> np.ndarray:
        """Integer labels for items in the given order (cluster index)."""
        out = np.empty(len(order), dtype=np.int64)
        lookup = {}
        for i, c in enumerate(self.clusters):
            for item in c:
                lookup[item] = i
        for j, item in enumerate(order):
            if item not in lookup:
                raise LabelMismatch(f"item {item!r} is not in the clustering")
            out[j] = lookup[item]
        return out


def from_labels(ids, labels) -> Clustering:
    """Group ids by label value into a Clustering."""
    ids = list(ids)
    labels = list(labels)
    if len(ids) != len(labels):
        raise LabelMismatch("ids and labels differ in length")
    groups: dict = {}
    for item, lab in zip(ids, labels):
        groups.setdefault(lab, set()).add(item)
    return Clustering(tuple(frozenset(g) for _, g in sorted(groups.items(),
                                                            key=lambda kv: str(kv[0]))))


def sim_index(truth: Clustering, candidate: Clustering) -> float:
    """Mean best-match Dice overlap of truth groups against a candidate.

    (1/g) * sum_i max_j 2 |G_j n C_i| / (|G_j| + |C_i|), where G are the
    truth groups and C the candidate clusters. Equals 1 exactly when the
    partitions coincide; positive whenever they share any item.
    """
    if truth.items != candidate.items:
        raise LabelMismatch("clusterings cover different item sets")
    g = truth.n_clusters
    total = 0.0
    for G in truth.clusters:
        best = 0.0
        for C in candidate.clusters:
            ov = 2.0 * len(G & C) / (len(G) + len(C))
            if ov > best:
                best = ov
        total += best
    return total / g
