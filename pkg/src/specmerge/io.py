"""File formats for the command-line pipeline.

Everything is CSV (arrays, matrices, tables) plus a JSON manifest
sidecar for metadata. Floats are written with 17 significant digits so
every file round-trips bit-exactly; writes go through a temp-then-rename
so partial runs never leave corrupt files behind.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile

import numpy as np

from .cluster import MergeStep, MergeTrace
from .distance import Clustering
from .epochs import AffinityMatrix, EpochSet, Phase, PhaseSegmentation
from .errors import FormatError
from .simulate import LabeledCorpus
from .spectral import Signal


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def atomic_write_text(path, text: str):
    """Write text to path via a temp file in the same directory."""
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_table(path, rows):
    """Write rows of strings as CSV, atomically."""
    import io as _io

    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    atomic_write_text(path, buf.getvalue())


def _read_rows(path) -> list[list[str]]:
    try:
        with open(path, newline="") as fh:
            return list(csv.reader(fh))
    except OSError as e:
        raise FormatError(f"{path}: cannot read ({e})") from e


def _parse_float(cell: str, path, line: int, col: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise FormatError(
            f"{path}: line {line}, column {col}: not a number: {cell!r}"
        ) from None


# -- Signal matrix ------------------------------------------------------------


def write_signal_csv(path, signals):
    """Rows = time samples, columns = channels, header = channel labels."""
    signals = list(signals)
    labels = [s.channel_id or f"ch{i}" for i, s in enumerate(signals)]
    mat = np.column_stack([s.samples for s in signals])
    rows = [labels]
    rows.extend([fmt_float(v) for v in row] for row in mat)
    write_table(path, rows)


def read_signal_csv(path) -> tuple[list[str], np.ndarray]:
    """Returns (channel labels, samples x channels array)."""
    rows = _read_rows(path)
    if len(rows) < 2:
        raise FormatError(f"{path}: need a header row and at least one sample row")
    labels = rows[0]
    n = len(labels)
    if n < 1 or len(set(labels)) != n:
        raise FormatError(f"{path}: header must hold unique channel labels")
    out = np.empty((len(rows) - 1, n))
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != n:
            raise FormatError(
                f"{path}: line {r}: expected {n} columns, got {len(row)}"
            )
        for c, cell in enumerate(row):
            out[r - 2, c] = _parse_float(cell, path, r, c + 1)
    return labels, out


# -- Manifest -----------------------------------------------------------------


def write_manifest(path, manifest: dict):
    atomic_write_text(path, json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def read_manifest(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as e:
        raise FormatError(f"{path}: cannot read ({e})") from e
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise FormatError(f"{path}: manifest must be a JSON object")
    return data


def require_field(manifest: dict, field: str, path="manifest"):
    if field not in manifest:
        raise FormatError(f"{path}: missing required field {field!r}")
    return manifest[field]


# -- Corpus (signals + truth) ---------------------------------------------------


def write_corpus(out_dir, corpus: LabeledCorpus):
    """signals.csv plus manifest.json with truth labels embedded."""
    os.makedirs(out_dir, exist_ok=True)
    write_signal_csv(os.path.join(out_dir, "signals.csv"), corpus.signals)
    truth = {}
    for i, cluster in enumerate(
        sorted(corpus.truth.clusters, key=lambda c: sorted(c)[0])
    ):
        for ch in sorted(cluster):
            truth[ch] = i
    write_manifest(
        os.path.join(out_dir, "manifest.json"),
        {
            "sampling_rate": corpus.signals[0].sampling_rate,
            "length": len(corpus.signals[0]),
            "design": corpus.design_name,
            "seed": corpus.seed,
            "truth": truth,
        },
    )


def read_corpus(out_dir) -> LabeledCorpus:
    csv_path = os.path.join(out_dir, "signals.csv")
    man_path = os.path.join(out_dir, "manifest.json")
    manifest = read_manifest(man_path)
    rate = float(require_field(manifest, "sampling_rate", man_path))
    truth_map = require_field(manifest, "truth", man_path)
    labels, mat = read_signal_csv(csv_path)
    signals = tuple(
        Signal(mat[:, i], rate, channel_id=lab) for i, lab in enumerate(labels)
    )
    groups: dict = {}
    for lab in labels:
        if lab not in truth_map:
            raise FormatError(f"{man_path}: truth is missing channel {lab!r}")
        groups.setdefault(truth_map[lab], set()).add(lab)
    truth = Clustering(tuple(frozenset(g) for _, g in sorted(groups.items(),
                                                             key=lambda kv: str(kv[0]))))
    return LabeledCorpus(
        signals=signals,
        truth=truth,
        design_name=str(manifest.get("design", "")),
        seed=int(manifest.get("seed", 0)),
    )


# -- Epoch sets -----------------------------------------------------------------


def write_epoch_set(out_dir, es: EpochSet, phases: PhaseSegmentation | None = None):
    """Epochs stacked vertically in signals.csv; manifest carries the split."""
    os.makedirs(out_dir, exist_ok=True)
    stacked = es.data.transpose(0, 2, 1).reshape(-1, es.n_channels)
    rows = [list(es.channel_labels)]
    rows.extend([fmt_float(v) for v in row] for row in stacked)
    write_table(os.path.join(out_dir, "signals.csv"), rows)
    manifest = {
        "sampling_rate": es.sampling_rate,
        "epoch_length": es.data.shape[2],
    }
    if phases is not None:
        manifest["phases"] = [
            {"name": p.name, "start": p.start, "end": p.end} for p in phases.phases
        ]
    write_manifest(os.path.join(out_dir, "manifest.json"), manifest)


def read_epoch_set(out_dir) -> tuple[EpochSet, PhaseSegmentation | None]:
    man_path = os.path.join(out_dir, "manifest.json")
    manifest = read_manifest(man_path)
    rate = float(require_field(manifest, "sampling_rate", man_path))
    epoch_len = int(require_field(manifest, "epoch_length", man_path))
    labels, mat = read_signal_csv(os.path.join(out_dir, "signals.csv"))
    if epoch_len < 4:
        raise FormatError(f"{man_path}: epoch_length must be >= 4")
    if mat.shape[0] % epoch_len != 0:
        raise FormatError(
            f"{man_path}: {mat.shape[0]} sample rows do not divide into "
            f"epochs of {epoch_len}"
        )
    n_epochs = mat.shape[0] // epoch_len
    data = mat.reshape(n_epochs, epoch_len, len(labels)).transpose(0, 2, 1)
    es = EpochSet(data, rate, tuple(labels))
    seg = None
    if "phases" in manifest:
        try:
            seg = PhaseSegmentation(
                tuple(
                    Phase(p["name"], int(p["start"]), int(p["end"]))
                    for p in manifest["phases"]
                )
            )
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"{man_path}: bad phases entry ({e})") from e
    return es, seg


# -- Analysis artifacts -----------------------------------------------------------


def write_cost_curve(path, costs: np.ndarray):
    rows = [["k", "cost"]]
    rows.extend([str(k + 1), fmt_float(c)] for k, c in enumerate(costs))
    write_table(path, rows)


def read_cost_curve(path) -> np.ndarray:
    rows = _read_rows(path)
    if not rows or rows[0] != ["k", "cost"]:
        raise FormatError(f"{path}: expected header k,cost")
    out = np.empty(len(rows) - 1)
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != 2 or int(row[0]) != r - 1:
            raise FormatError(f"{path}: line {r}: expected k={r - 1}")
        out[r - 2] = _parse_float(row[1], path, r, 2)
    return out


def clustering_assignments(clustering: Clustering) -> list[tuple[str, int]]:
    """Deterministic (channel, cluster index) rows: clusters ordered by
    their smallest member label, channels sorted within."""
    ordered = sorted(clustering.clusters, key=lambda c: sorted(str(m) for m in c)[0])
    rows = []
    for i, cluster in enumerate(ordered):
        for ch in sorted(str(m) for m in cluster):
            rows.append((ch, i))
    rows.sort(key=lambda t: t[0])
    return rows


def write_clustering(path, clustering: Clustering):
    rows = [["channel", "cluster"]]
    rows.extend([ch, str(i)] for ch, i in clustering_assignments(clustering))
    write_table(path, rows)


def read_clustering(path) -> Clustering:
    rows = _read_rows(path)
    if not rows or rows[0] != ["channel", "cluster"]:
        raise FormatError(f"{path}: expected header channel,cluster")
    groups: dict = {}
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise FormatError(f"{path}: line {r}: expected 2 columns")
        try:
            groups.setdefault(int(row[1]), set()).add(row[0])
        except ValueError:
            raise FormatError(
                f"{path}: line {r}, column 2: not an integer: {row[1]!r}"
            ) from None
    if not groups:
        raise FormatError(f"{path}: no assignments")
    return Clustering(tuple(frozenset(g) for _, g in sorted(groups.items())))


def write_affinity(path, am: AffinityMatrix):
    rows = [["epoch_count", str(am.epoch_count)], [""] + list(am.labels)]
    for i, lab in enumerate(am.labels):
        rows.append([lab] + [fmt_float(v) for v in am.entries[i]])
    write_table(path, rows)


def read_affinity(path) -> AffinityMatrix:
    rows = _read_rows(path)
    if len(rows) < 3 or rows[0][:1] != ["epoch_count"]:
        raise FormatError(f"{path}: expected an epoch_count row then a label row")
    try:
        epoch_count = int(rows[0][1])
    except (IndexError, ValueError):
        raise FormatError(f"{path}: line 1: bad epoch_count") from None
    labels = rows[1][1:]
    n = len(labels)
    entries = np.empty((n, n))
    if len(rows) != n + 2:
        raise FormatError(f"{path}: expected {n} matrix rows, got {len(rows) - 2}")
    for i, row in enumerate(rows[2:]):
        line = i + 3
        if len(row) != n + 1 or row[0] != labels[i]:
            raise FormatError(f"{path}: line {line}: row label mismatch")
        for j in range(n):
            entries[i, j] = _parse_float(row[j + 1], path, line, j + 2)
    return AffinityMatrix(entries=entries, epoch_count=epoch_count,
                          labels=tuple(labels))


def write_trace(path, trace: MergeTrace):
    rows = [["channels"] + list(trace.channel_ids),
            ["k_before", "a", "b", "cost"]]
    for step in trace.steps:
        rows.append([str(step.k_before), str(step.pair[0]), str(step.pair[1]),
                     fmt_float(step.cost)])
    write_table(path, rows)


def read_trace(path) -> MergeTrace:
    rows = _read_rows(path)
    if len(rows) < 2 or rows[0][:1] != ["channels"]:
        raise FormatError(f"{path}: expected a channels row then a step header")
    channel_ids = tuple(rows[0][1:])
    n = len(channel_ids)
    if rows[1] != ["k_before", "a", "b", "cost"]:
        raise FormatError(f"{path}: line 2: bad step header")
    members = {i: frozenset([i]) for i in range(n)}
    steps = []
    costs = np.empty(n - 1)
    for r, row in enumerate(rows[2:], start=3):
        if len(row) != 4:
            raise FormatError(f"{path}: line {r}: expected 4 columns")
        try:
            k_before, a, b = int(row[0]), int(row[1]), int(row[2])
        except ValueError:
            raise FormatError(f"{path}: line {r}: non-integer step fields") from None
        cost = _parse_float(row[3], path, r, 4)
        if a not in members or b not in members:
            raise FormatError(f"{path}: line {r}: unknown cluster id")
        merged = members[a] | members[b]
        members[a] = merged
        del members[b]
        steps.append(MergeStep(k_before=k_before, pair=(a, b), cost=cost,
                               members=merged))
        costs[k_before - 2] = cost
    if len(steps) != n - 1:
        raise FormatError(f"{path}: expected {n - 1} steps, got {len(steps)}")
    return MergeTrace(channel_ids=channel_ids, steps=tuple(steps), costs=costs)


def write_sim_table(path, sims: dict[str, np.ndarray]):
    rows = [["method", "draw", "sim"]]
    for method in sorted(sims):
        for d, v in enumerate(sims[method]):
            rows.append([method, str(d), fmt_float(v)])
    write_table(path, rows)


def read_sim_table(path) -> dict[str, np.ndarray]:
    rows = _read_rows(path)
    if not rows or rows[0] != ["method", "draw", "sim"]:
        raise FormatError(f"{path}: expected header method,draw,sim")
    acc: dict[str, list] = {}
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise FormatError(f"{path}: line {r}: expected 3 columns")
        acc.setdefault(row[0], []).append(_parse_float(row[2], path, r, 3))
    return {m: np.array(v) for m, v in acc.items()}
