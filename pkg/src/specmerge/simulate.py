"""Simulation of AR(2) oscillations and labeled mixture corpora.

Latent AR(2) processes with root modulus M and peak frequency eta are
mixed through per-cluster coefficient vectors to produce multichannel
corpora with known ground-truth clusterings. Generation is deterministic
per seed and uses one counter-based RNG substream per channel, so the
channels could be generated in parallel without changing the output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .distance import Clustering
from .errors import InvalidSignal, UnknownDesign
from .spectral import Signal, ar2_transfer_coefficients as ar2_coefficients

#: Samples discarded before keeping output; enough for M >= 1.01.
BURN_IN = 500

_DEFAULT_ETAS = (2.0, 6.0, 10.0, 21.0, 40.0)
_DIRICHLET_SEED = 771


@dataclass(frozen=True)
class Ar2Params:
    """AR(2) oscillation parameters: root modulus m (> 1), peak frequency
    eta in Hz, sampling rate fs, innovation standard deviation."""

    m: float
    eta: float
    fs: float
    innovation_sd: float = 1.0

    def __post_init__(self):
        # Delegates the m/eta/fs checks; raises NonCausal for m <= 1.
        ar2_coefficients(self.m, self.eta, self.fs)
        if not self.innovation_sd > 0:
            raise ValueError(f"innovation_sd must be > 0, got {self.innovation_sd}")

    def coefficients(self) -> tuple[float, float]:
        return ar2_coefficients(self.m, self.eta, self.fs)


def default_latents(m: float = 1.01, fs: float = 100.0,
                    innovation_sd: float = 1.0) -> tuple[Ar2Params, ...]:
    """The five standard latent oscillations at 2, 6, 10, 21 and 40 Hz."""
    return tuple(
        Ar2Params(m=m, eta=eta, fs=fs, innovation_sd=innovation_sd)
        for eta in _DEFAULT_ETAS
    )


def _generator(seed_seq: np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed_seq))


def _draw_ar2(rng: np.random.Generator, params: Ar2Params, t: int,
              burn_in: int) -> np.ndarray:
    eps = rng.standard_normal(t + burn_in) * params.innovation_sd
    phi1, phi2 = params.coefficients()
    z = _kernels.ar2_recursion(phi1, phi2, eps)
    return z[burn_in:]


def simulate_ar2(params: Ar2Params, t: int, seed: int,
                 burn_in: int = BURN_IN) -> Signal:
    """Simulate one AR(2) series of length t, deterministic per seed.

    The recursion starts from zero state and runs for burn_in extra steps
    that are discarded.
    """
    if t < 100:
        raise InvalidSignal(f"simulated length must be >= 100, got {t}")
    rng = _generator(np.random.SeedSequence(seed))
    values = _draw_ar2(rng, params, t, burn_in)
    return Signal(values, params.fs, channel_id=f"ar2_eta{params.eta:g}")


@dataclass(frozen=True)
class MixtureDesign:
    """A labeled-corpus recipe: K coefficient rows over 5 latent AR(2)
    oscillations, n replicate channels per row, plus observation noise.

    Channel (i, j) is coefficients[i] @ Z + noise, where Z stacks the
    five latent series. Each row must touch at least one latent.
    """

    name: str
    coefficients: np.ndarray
    replicates: int
    latents: tuple[Ar2Params, ...] = ()
    noise_sd: float = 1.0
    length: int = 1000
    seed: int = 0

    def __post_init__(self):
        coeff = np.array(self.coefficients, dtype=np.float64)
        latents = tuple(self.latents) or default_latents()
        if coeff.ndim != 2 or coeff.shape[1] != len(latents):
            raise ValueError(
                f"coefficient matrix must be K x {len(latents)}, got {coeff.shape}"
            )
        if coeff.shape[0] < 1 or self.replicates < 1:
            raise ValueError("need at least one cluster row and one replicate")
        if np.any(np.all(coeff == 0.0, axis=1)):
            raise ValueError("every coefficient row needs a nonzero entry")
        if self.noise_sd < 0:
            raise ValueError(f"noise_sd must be >= 0, got {self.noise_sd}")
        if self.length < 100:
            raise InvalidSignal(f"corpus length must be >= 100, got {self.length}")
        fs = {p.fs for p in latents}
        if len(fs) != 1:
            raise ValueError("all latents must share one sampling rate")
        coeff.setflags(write=False)
        object.__setattr__(self, "coefficients", coeff)
        object.__setattr__(self, "latents", latents)

    @property
    def n_clusters(self) -> int:
        return self.coefficients.shape[0]

    @property
    def sampling_rate(self) -> float:
        return self.latents[0].fs

    def channel_ids(self) -> tuple[str, ...]:
        return tuple(
            f"g{i + 1}r{j + 1}"
            for i in range(self.n_clusters)
            for j in range(self.replicates)
        )


@dataclass(frozen=True)
class LabeledCorpus:
    """Simulated channels together with their ground-truth clustering."""

    signals: tuple[Signal, ...]
    truth: Clustering
    design_name: str = ""
    seed: int = 0

    def __post_init__(self):
        ids = frozenset(s.channel_id for s in self.signals)
        if len(ids) != len(self.signals):
            raise ValueError("corpus channel ids must be unique")
        if self.truth.items != ids:
            raise ValueError("truth clustering must cover exactly the corpus channels")


def _draw_latent_stack(rng, latents, t, burn_in) -> np.ndarray:
    return np.stack([_draw_ar2(rng, p, t, burn_in) for p in latents])


def simulate_mixture(design: MixtureDesign, shared_latents: bool = False,
                     burn_in: int = BURN_IN) -> LabeledCorpus:
    """Generate the labeled corpus a design describes.

    By default every channel draws its own independent realization of the
    five latent oscillations, so channels in the same cluster share a
    spectrum but are incoherent. With shared_latents=True one latent
    realization is reused across all channels and only the observation
    noise varies, which makes same-cluster channels strongly coherent.

    Within a channel's substream the latent innovations are drawn first
    (in latent order), then the observation noise; this ordering is part
    of the deterministic output contract.
    """
    k, n, t = design.n_clusters, design.replicates, design.length
    root = np.random.SeedSequence(design.seed)
    seqs = root.spawn(k * n + 1)
    shared = None
    if shared_latents:
        shared = _draw_latent_stack(_generator(seqs[0]), design.latents, t, burn_in)

    signals = []
    groups = []
    c = 0
    for i in range(k):
        members = set()
        for j in range(n):
            rng = _generator(seqs[1 + c])
            z = shared if shared is not None else _draw_latent_stack(
                rng, design.latents, t, burn_in)
            x = design.coefficients[i] @ z
            if design.noise_sd > 0:
                x = x + rng.standard_normal(t) * design.noise_sd
            cid = f"g{i + 1}r{j + 1}"
            signals.append(Signal(x, design.sampling_rate, channel_id=cid))
            members.add(cid)
            c += 1
        groups.append(frozenset(members))

    return LabeledCorpus(
        signals=tuple(signals),
        truth=Clustering(tuple(groups)),
        design_name=design.name,
        seed=design.seed,
    )


# -- Built-in designs --------------------------------------------------------

_DESIGN12_ROWS = np.array(
    [
        [1.0, 2.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 2.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0, 1.0],
        [0.0, 0.0, 1.0, 2.0, 0.0],
    ]
)

_DESIGN3_ROWS = np.array(
    [
        [0.5, 1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.5, 0.0, 0.0],
        [0.0, 0.0, 0.5, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0, 0.5],
        [0.0, 1.0, 0.0, 1.0, 0.0],
    ]
)


def dirichlet_rows(seed: int, k: int = 5, concentration: float = 0.2) -> np.ndarray:
    """Draw k mixture rows from a symmetric Dirichlet; rows are
    nonnegative and sum to 1."""
    rng = _generator(np.random.SeedSequence(seed))
    return rng.dirichlet(np.full(5, concentration), size=k)


def builtin_designs(seed: int = 0) -> dict[str, MixtureDesign]:
    """Catalog of the four standard benchmark designs.

    design1: integer rows, 10 replicates per cluster. design2: the same
    rows with 3 replicates. design3: fractional rows, 3 replicates.
    design4: rows drawn once from Dirichlet(0.2, ..., 0.2) with a fixed
    internal seed, 3 replicates. The seed argument sets the corpus seed
    of every returned design, not the Dirichlet rows.
    """
    common = dict(noise_sd=1.0, length=1000, seed=seed)
    return {
        "design1": MixtureDesign(name="design1", coefficients=_DESIGN12_ROWS,
                                 replicates=10, **common),
        "design2": MixtureDesign(name="design2", coefficients=_DESIGN12_ROWS,
                                 replicates=3, **common),
        "design3": MixtureDesign(name="design3", coefficients=_DESIGN3_ROWS,
                                 replicates=3, **common),
        "design4": MixtureDesign(name="design4",
                                 coefficients=dirichlet_rows(_DIRICHLET_SEED),
                                 replicates=3, **common),
    }


def get_design(name: str, seed: int = 0) -> MixtureDesign:
    """Look up a built-in design by name, with the given corpus seed."""
    catalog = builtin_designs(seed=seed)
    if name not in catalog:
        raise UnknownDesign(
            f"unknown design {name!r}; available: {', '.join(sorted(catalog))}"
        )
    return catalog[name]
