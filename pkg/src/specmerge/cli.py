"""Command-line interface.

Subcommands: simulate (labeled corpora from built-in or file designs),
cluster (merger clustering of a signal matrix), epochs (per-epoch
clustering with affinity and phase comparison), compare (benchmark SMC
against complete-linkage baselines), gcv (bandwidth selection).

Every command is deterministic given its inputs, flags, and seed.
SPECMERGE_THREADS sets the worker count for per-epoch and per-draw
parallelism; results are identical at any thread count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import io as smio
from .cluster import (
    ALL_METHODS,
    MergeStrategy,
    benchmark_compare,
    cut_trace,
    select_k,
    smc_cluster,
)
from .epochs import EpochSet, Phase, PhaseSegmentation, analyze_traces
from .errors import (
    DegenerateSpectrum,
    FormatError,
    GridMismatch,
    InvalidSignal,
    LabelMismatch,
    NonCausal,
    SpecmergeError,
    TooFewChannels,
    UnknownDesign,
)
from .simulate import (
    Ar2Params,
    MixtureDesign,
    get_design,
    simulate_mixture,
)
from .spectral import Signal, SmoothingConfig, gcv_select_bandwidth

_DEFAULT_GCV_CANDIDATES = (25, 50, 75, 100, 125, 150)

_METHOD_ALIASES = {
    "smc": "smc_tvd",
    "dnp": "complete_dnp",
    "dlnp": "complete_dlnp",
    "dskl": "complete_dskl",
}


@dataclass(frozen=True)
class RunConfig:
    """Validated analysis settings shared by cluster/epochs/compare."""

    bandwidth: int | str = 100
    gcv_candidates: tuple[int, ...] = _DEFAULT_GCV_CANDIDATES
    grid_size: int = 512
    strategy: str = "concatenate"
    k: int | str = "auto"
    tau: float = 0.01
    threshold: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.bandwidth, str):
            if self.bandwidth != "gcv":
                raise ValueError(
                    f"bandwidth must be a positive integer or 'gcv', "
                    f"got {self.bandwidth!r}"
                )
            if not self.gcv_candidates or any(c < 1 for c in self.gcv_candidates):
                raise ValueError("gcv candidates must be positive integers")
        elif self.bandwidth < 1:
            raise ValueError(f"bandwidth must be >= 1, got {self.bandwidth}")
        if self.grid_size < 8:
            raise ValueError(f"grid_size must be >= 8, got {self.grid_size}")
        MergeStrategy(self.strategy)
        if isinstance(self.k, str):
            if self.k != "auto":
                raise ValueError(f"k must be a positive integer or 'auto', got {self.k!r}")
        elif self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError(f"threshold must be in (0, 1], got {self.threshold}")

    def merge_strategy(self) -> MergeStrategy:
        return MergeStrategy(self.strategy)

    def smoothing(self, signals) -> SmoothingConfig:
        if self.bandwidth == "gcv":
            chosen = [gcv_select_bandwidth(s, self.gcv_candidates) for s in signals]
            # One bandwidth must serve all channels: take the upper median
            # of the per-channel selections.
            a = sorted(chosen)[len(chosen) // 2]
            return SmoothingConfig(bandwidth=a, grid_size=self.grid_size)
        return SmoothingConfig(bandwidth=self.bandwidth, grid_size=self.grid_size)


def thread_count() -> int:
    raw = os.environ.get("SPECMERGE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"SPECMERGE_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def _parallel_map(fn, items) -> list:
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# -- Argument parsing ---------------------------------------------------------


def _parse_k(text: str):
    if text == "auto":
        return "auto"
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"k must be a positive integer or 'auto', got {text!r}"
        ) from None


def _parse_bandwidth(text: str):
    if text == "gcv":
        return "gcv"
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"bandwidth must be a positive integer or 'gcv', got {text!r}"
        ) from None


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected a comma-separated integer list, got {text!r}"
        ) from None


def parse_phases(text: str) -> PhaseSegmentation:
    """Parse 'early=1-50,middle=51-110' into a PhaseSegmentation."""
    phases = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            name, span = item.split("=", 1)
            start, end = span.split("-", 1)
            phases.append(Phase(name.strip(), int(start), int(end)))
        except ValueError:
            raise ValueError(
                f"bad phase {item!r}; expected name=start-end"
            ) from None
    return PhaseSegmentation(tuple(phases))


def _add_analysis_flags(p: argparse.ArgumentParser):
    p.add_argument("--bandwidth", type=_parse_bandwidth, default=100,
                   help="Parzen lag-window bandwidth, or 'gcv' (default 100)")
    p.add_argument("--candidates", type=_parse_int_list,
                   default=_DEFAULT_GCV_CANDIDATES, metavar="A,B,...",
                   help="candidate bandwidths for gcv selection")
    p.add_argument("--grid-size", type=int, default=512,
                   help="frequency grid points over [0, 0.5] (default 512)")
    p.add_argument("--strategy", choices=("concatenate", "spectral_average"),
                   default="concatenate",
                   help="merged-density re-estimation strategy")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specmerge",
        description="Spectral merger clustering of multichannel time series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a labeled benchmark corpus")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--design", help="built-in design name (design1..design4)")
    g.add_argument("--design-file", help="JSON design description")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shared-latents", action="store_true",
                   help="reuse one latent draw across all channels")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("cluster", help="merger-cluster a signal matrix")
    p.add_argument("input", help="corpus directory or signals CSV")
    p.add_argument("--rate", type=float, default=None,
                   help="sampling rate in Hz (overrides the manifest)")
    _add_analysis_flags(p)
    p.add_argument("--k", type=_parse_k, default="auto",
                   help="cluster count, or 'auto' for the elbow rule")
    p.add_argument("--tau", type=float, default=0.01,
                   help="elbow threshold for --k auto (default 0.01)")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("epochs", help="per-epoch clustering and phase comparison")
    p.add_argument("input", help="epoch directory (signals.csv + manifest.json)")
    _add_analysis_flags(p)
    p.add_argument("--phases", default=None, metavar="NAME=A-B,...",
                   help="phase ranges, 1-based inclusive (overrides manifest)")
    p.add_argument("--tau", type=float, default=0.01)
    p.add_argument("--threshold", type=float, default=0.5,
                   help="stability threshold on within-cluster affinity")
    p.add_argument("--detrend", action="store_true",
                   help="linearly detrend each epoch/channel first")
    p.add_argument("--dump-traces", action="store_true",
                   help="also write one merge-trace CSV per epoch")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_epochs)

    p = sub.add_parser("compare", help="benchmark clustering methods on a corpus")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--input", help="corpus directory (single draw)")
    g.add_argument("--design", help="built-in design to draw corpora from")
    p.add_argument("--draws", type=int, default=100,
                   help="number of corpus draws for --design (default 100)")
    p.add_argument("--seed", type=int, default=0,
                   help="base seed; draw d uses seed+d")
    p.add_argument("--k", type=int, required=True, help="true cluster count")
    p.add_argument("--methods", default="smc,dnp,dlnp,dskl",
                   help="comma list from smc,dnp,dlnp,dskl")
    _add_analysis_flags(p)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gcv", help="select a Parzen bandwidth per channel")
    p.add_argument("input", help="corpus directory or signals CSV")
    p.add_argument("--rate", type=float, default=None)
    p.add_argument("--candidates", type=_parse_int_list,
                   default=_DEFAULT_GCV_CANDIDATES, metavar="A,B,...")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_gcv)

    return parser


# -- Input helpers ------------------------------------------------------------


def _locate_input(path: str) -> tuple[str, str | None]:
    """Resolve a directory-or-CSV input to (csv_path, manifest_path|None)."""
    if os.path.isdir(path):
        csv_path = os.path.join(path, "signals.csv")
        man_path = os.path.join(path, "manifest.json")
        return csv_path, man_path if os.path.exists(man_path) else None
    man_path = os.path.join(os.path.dirname(path) or ".", "manifest.json")
    return path, man_path if os.path.exists(man_path) else None


def _load_signals(path: str, rate_flag: float | None) -> list[Signal]:
    csv_path, man_path = _locate_input(path)
    rate = rate_flag
    if rate is None and man_path is not None:
        manifest = smio.read_manifest(man_path)
        if "sampling_rate" in manifest:
            rate = float(manifest["sampling_rate"])
    if rate is None:
        raise ValueError(
            "sampling rate unknown: pass --rate or provide a manifest"
        )
    if not rate > 0:
        raise ValueError(f"sampling rate must be > 0, got {rate}")
    labels, mat = smio.read_signal_csv(csv_path)
    return [Signal(mat[:, i], rate, channel_id=lab) for i, lab in enumerate(labels)]


def _write_json(path, payload: dict):
    smio.atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


# -- Commands -----------------------------------------------------------------


def _design_from_file(path: str) -> MixtureDesign:
    spec = smio.read_manifest(path)
    try:
        etas = spec.get("etas", (2.0, 6.0, 10.0, 21.0, 40.0))
        latents = tuple(
            Ar2Params(
                m=float(spec.get("m", 1.01)),
                eta=float(eta),
                fs=float(spec.get("fs", 100.0)),
                innovation_sd=float(spec.get("innovation_sd", 1.0)),
            )
            for eta in etas
        )
        return MixtureDesign(
            name=str(spec.get("name", os.path.basename(path))),
            coefficients=np.asarray(spec["coefficients"], dtype=np.float64),
            replicates=int(spec.get("replicates", 1)),
            latents=latents,
            noise_sd=float(spec.get("noise_sd", 1.0)),
            length=int(spec.get("length", 1000)),
            seed=int(spec.get("seed", 0)),
        )
    except KeyError as e:
        raise FormatError(f"{path}: missing required field {e.args[0]!r}") from e
    except (TypeError, ValueError) as e:
        raise FormatError(f"{path}: bad design value ({e})") from e


def cmd_simulate(args) -> int:
    if args.design is not None:
        design = get_design(args.design, seed=args.seed)
    else:
        base = _design_from_file(args.design_file)
        design = MixtureDesign(
            name=base.name, coefficients=base.coefficients,
            replicates=base.replicates, latents=base.latents,
            noise_sd=base.noise_sd, length=base.length, seed=args.seed,
        )
    corpus = simulate_mixture(design, shared_latents=args.shared_latents)
    smio.write_corpus(args.out, corpus)
    print(f"wrote {len(corpus.signals)} channels x {len(corpus.signals[0])} "
          f"samples to {args.out}")
    return 0


def cmd_cluster(args) -> int:
    cfg = RunConfig(bandwidth=args.bandwidth, gcv_candidates=args.candidates,
                    grid_size=args.grid_size, strategy=args.strategy,
                    k=args.k, tau=args.tau)
    signals = _load_signals(args.input, args.rate)
    smoothing = cfg.smoothing(signals)
    trace = smc_cluster(signals, smoothing, cfg.merge_strategy())
    if cfg.k == "auto":
        k_star = select_k(trace, cfg.tau)
    else:
        k_star = cfg.k
        if not 1 <= k_star <= trace.n_channels:
            raise ValueError(
                f"k must be in [1, {trace.n_channels}], got {k_star}"
            )
    clustering = cut_trace(trace, k_star)

    os.makedirs(args.out, exist_ok=True)
    smio.write_trace(os.path.join(args.out, "trace.csv"), trace)
    smio.write_cost_curve(os.path.join(args.out, "cost_curve.csv"), trace.costs)
    smio.write_clustering(os.path.join(args.out, "clustering.csv"), clustering)
    _write_json(os.path.join(args.out, "result.json"), {
        "k_star": k_star,
        "k_mode": "auto" if cfg.k == "auto" else "fixed",
        "tau": cfg.tau,
        "bandwidth": smoothing.bandwidth,
        "grid_size": smoothing.grid_size,
        "strategy": cfg.strategy,
        "n_channels": trace.n_channels,
    })
    print(f"clustered {trace.n_channels} channels into {k_star} clusters "
          f"(bandwidth {smoothing.bandwidth})")
    return 0


def cmd_epochs(args) -> int:
    cfg = RunConfig(bandwidth=args.bandwidth, gcv_candidates=args.candidates,
                    grid_size=args.grid_size, strategy=args.strategy,
                    tau=args.tau, threshold=args.threshold)
    es, seg = smio.read_epoch_set(args.input)
    if args.detrend:
        es = es.detrended()
    if args.phases is not None:
        seg = parse_phases(args.phases)
    if seg is None:
        seg = PhaseSegmentation((Phase("all", 1, es.n_epochs),))
    seg.validate_for(es.n_epochs)

    smoothing = cfg.smoothing(es.epoch_signals(0))
    strategy = cfg.merge_strategy()
    traces = _parallel_map(
        lambda e: smc_cluster(es.epoch_signals(e), smoothing, strategy),
        range(es.n_epochs),
    )

    os.makedirs(args.out, exist_ok=True)
    if args.dump_traces:
        for i, t in enumerate(traces):
            smio.write_trace(os.path.join(args.out, f"trace_epoch{i + 1}.csv"), t)

    summary: dict = {"n_epochs": es.n_epochs, "tau": cfg.tau,
                     "threshold": cfg.threshold, "bandwidth": smoothing.bandwidth,
                     "strategy": cfg.strategy, "phases": {}}
    for phase in seg.phases:
        subset = [traces[i] for i in phase.indices()]
        res = analyze_traces(subset, cfg.tau, cfg.threshold, name=phase.name)
        smio.write_affinity(
            os.path.join(args.out, f"affinity_{phase.name}.csv"), res.affinity)
        smio.write_cost_curve(
            os.path.join(args.out, f"cost_curve_{phase.name}.csv"), res.mean_costs)
        smio.write_clustering(
            os.path.join(args.out, f"clustering_{phase.name}.csv"),
            res.representative.clustering)
        summary["phases"][phase.name] = {
            "start": phase.start,
            "end": phase.end,
            "k_star": res.k_star,
            "stable": list(res.representative.stable),
        }
        print(f"phase {phase.name}: epochs {phase.start}-{phase.end}, "
              f"K*={res.k_star}")
    _write_json(os.path.join(args.out, "result.json"), summary)
    return 0


def cmd_compare(args) -> int:
    cfg = RunConfig(bandwidth=args.bandwidth, gcv_candidates=args.candidates,
                    grid_size=args.grid_size, strategy=args.strategy,
                    k=args.k, seed=args.seed)
    names = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in names if m not in _METHOD_ALIASES]
    if unknown:
        raise ValueError(
            f"unknown methods {unknown}; choose from {sorted(_METHOD_ALIASES)}"
        )
    methods = tuple(_METHOD_ALIASES[m] for m in names)

    if args.input is not None:
        draws = [smio.read_corpus(args.input)]
    else:
        if args.draws < 1:
            raise ValueError(f"--draws must be >= 1, got {args.draws}")
        designs = [get_design(args.design, seed=args.seed + d)
                   for d in range(args.draws)]
        draws = _parallel_map(simulate_mixture, designs)

    smoothing = cfg.smoothing(draws[0].signals)
    sims = benchmark_compare(draws, args.k, smoothing, cfg.merge_strategy(),
                             methods=methods)

    os.makedirs(args.out, exist_ok=True)
    smio.write_sim_table(os.path.join(args.out, "sim_table.csv"), sims)
    summary = {
        m: {"mean": float(np.mean(v)), "sd": float(np.std(v, ddof=1)) if v.size > 1 else 0.0,
            "n": int(v.size)}
        for m, v in sims.items()
    }
    _write_json(os.path.join(args.out, "summary.json"), summary)
    print(f"{'method':<16}{'n':>5}{'mean':>10}{'sd':>10}")
    for m in sorted(sims):
        s = summary[m]
        print(f"{m:<16}{s['n']:>5}{s['mean']:>10.4f}{s['sd']:>10.4f}")
    return 0


def cmd_gcv(args) -> int:
    signals = _load_signals(args.input, args.rate)
    if not args.candidates:
        raise ValueError("gcv needs a non-empty candidate list")
    rows = [["channel", "bandwidth"]]
    for s in signals:
        a = gcv_select_bandwidth(s, args.candidates)
        rows.append([s.channel_id, str(a)])
        print(f"{s.channel_id}: {a}")
    os.makedirs(args.out, exist_ok=True)
    smio.write_table(os.path.join(args.out, "bandwidths.csv"), rows)
    return 0


# -- Entry point --------------------------------------------------------------


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except DegenerateSpectrum as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except (UnknownDesign, NonCausal) as e:
        msg = e.args[0] if e.args else e
        print(f"error: {msg}", file=sys.stderr)
        return 2
    except (GridMismatch, LabelMismatch, InvalidSignal, TooFewChannels) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except SpecmergeError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
