import json
import os

import numpy as np
import pytest
from hypothesis import given, strategies as st

from specmerge import (
    AffinityMatrix,
    Clustering,
    EpochSet,
    FormatError,
    MixtureDesign,
    Phase,
    PhaseSegmentation,
    Signal,
    SmoothingConfig,
    simulate_mixture,
    smc_cluster,
)
from specmerge import io as smio


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_float_round_trips_exactly(x):
    assert float(smio.fmt_float(x)) == x


def test_atomic_write_leaves_no_temp(tmp_path):
    target = tmp_path / "out.txt"
    smio.atomic_write_text(target, "payload\n")
    assert target.read_text() == "payload\n"
    assert os.listdir(tmp_path) == ["out.txt"]


# -- Corpus round trip --------------------------------------------------------


def _small_corpus(seed=3):
    d = MixtureDesign(name="toy",
                      coefficients=[[1, 0, 0, 0, 0], [0, 0, 0, 0, 1]],
                      replicates=2, length=120, seed=seed)
    return simulate_mixture(d)


def test_corpus_round_trip(tmp_path):
    corpus = _small_corpus()
    smio.write_corpus(tmp_path, corpus)
    back = smio.read_corpus(tmp_path)
    assert back.design_name == corpus.design_name
    assert back.seed == corpus.seed
    assert set(back.truth.clusters) == set(corpus.truth.clusters)
    for a, b in zip(corpus.signals, back.signals):
        assert a.channel_id == b.channel_id
        assert a.sampling_rate == b.sampling_rate
        np.testing.assert_array_equal(a.samples, b.samples)  # 17g is exact


def test_read_corpus_missing_manifest_field(tmp_path):
    corpus = _small_corpus()
    smio.write_corpus(tmp_path, corpus)
    manifest = smio.read_manifest(tmp_path / "manifest.json")
    del manifest["sampling_rate"]
    smio.write_manifest(tmp_path / "manifest.json", manifest)
    with pytest.raises(FormatError, match="sampling_rate"):
        smio.read_corpus(tmp_path)


# -- Signal CSV ----------------------------------------------------------------


def test_signal_csv_rejects_bad_cell(tmp_path):
    p = tmp_path / "signals.csv"
    p.write_text("a,b\n1.0,2.0\n1.5,oops\n")
    with pytest.raises(FormatError, match="line 3"):
        smio.read_signal_csv(p)


def test_signal_csv_rejects_duplicate_labels(tmp_path):
    p = tmp_path / "signals.csv"
    p.write_text("a,a\n1.0,2.0\n1.5,2.5\n")
    with pytest.raises(FormatError):
        smio.read_signal_csv(p)


def test_signal_csv_round_trip(tmp_path, rng):
    sigs = [Signal(rng.standard_normal(32), 10.0, channel_id=c)
            for c in ("left", "right")]
    p = tmp_path / "signals.csv"
    smio.write_signal_csv(p, sigs)
    labels, data = smio.read_signal_csv(p)
    assert labels == ["left", "right"]
    np.testing.assert_array_equal(data[:, 0], sigs[0].samples)
    np.testing.assert_array_equal(data[:, 1], sigs[1].samples)


# -- Manifest ------------------------------------------------------------------


def test_manifest_errors(tmp_path):
    p = tmp_path / "manifest.json"
    with pytest.raises(FormatError):
        smio.read_manifest(p)  # missing file
    p.write_text("[1, 2]")
    with pytest.raises(FormatError):
        smio.read_manifest(p)
    p.write_text("{not json")
    with pytest.raises(FormatError):
        smio.read_manifest(p)
    p.write_text('{"a": 1}')
    assert smio.read_manifest(p) == {"a": 1}
    with pytest.raises(FormatError, match="missing required field"):
        smio.require_field({"a": 1}, "b")


def test_manifest_is_stable_json(tmp_path):
    p = tmp_path / "m.json"
    smio.write_manifest(p, {"z": 1, "a": 2})
    text = p.read_text()
    assert text.index('"a"') < text.index('"z"')  # sorted keys
    assert text.endswith("\n")
    assert json.loads(text) == {"z": 1, "a": 2}


# -- Epoch set -------------------------------------------------------------------


def test_epoch_set_round_trip(tmp_path, rng):
    es = EpochSet(rng.standard_normal((3, 2, 40)), 64.0,
                  channel_labels=("p", "q"))
    seg = PhaseSegmentation((Phase("one", 1, 2), Phase("two", 3, 3)))
    smio.write_epoch_set(tmp_path, es, seg)
    back, seg_back = smio.read_epoch_set(tmp_path)
    np.testing.assert_array_equal(back.data, es.data)
    assert back.sampling_rate == 64.0
    assert back.channel_labels == ("p", "q")
    assert seg_back is not None
    assert [(p.name, p.start, p.end) for p in seg_back.phases] == [
        ("one", 1, 2), ("two", 3, 3)]


def test_epoch_set_round_trip_without_phases(tmp_path, rng):
    es = EpochSet(rng.standard_normal((2, 2, 16)), 32.0)
    smio.write_epoch_set(tmp_path, es)
    back, seg = smio.read_epoch_set(tmp_path)
    assert seg is None
    assert back.n_epochs == 2


def test_epoch_set_rejects_ragged_file(tmp_path, rng):
    es = EpochSet(rng.standard_normal((2, 2, 16)), 32.0)
    smio.write_epoch_set(tmp_path, es)
    manifest = smio.read_manifest(tmp_path / "manifest.json")
    manifest["epoch_length"] = 10  # 32 rows don't divide into 10-sample epochs
    smio.write_manifest(tmp_path / "manifest.json", manifest)
    with pytest.raises(FormatError):
        smio.read_epoch_set(tmp_path)


# -- Analysis artifacts -----------------------------------------------------------


def test_cost_curve_round_trip(tmp_path):
    costs = np.array([0.71, 0.32, 0.011, 0.0052])
    p = tmp_path / "curve.csv"
    smio.write_cost_curve(p, costs)
    np.testing.assert_array_equal(smio.read_cost_curve(p), costs)


def test_clustering_assignment_order():
    c = Clustering((frozenset({"b", "c"}), frozenset({"a"})))
    rows = smio.clustering_assignments(c)
    # cluster numbering follows the smallest member label; rows sorted
    assert rows == [("a", 0), ("b", 1), ("c", 1)]


def test_clustering_round_trip(tmp_path):
    c = Clustering((frozenset({"b", "c"}), frozenset({"a"})))
    p = tmp_path / "clust.csv"
    smio.write_clustering(p, c)
    back = smio.read_clustering(p)
    assert set(back.clusters) == set(c.clusters)


def test_affinity_round_trip(tmp_path):
    am = AffinityMatrix(entries=np.array([[1.0, 0.25], [0.25, 1.0]]),
                        epoch_count=8, labels=("x", "y"))
    p = tmp_path / "aff.csv"
    smio.write_affinity(p, am)
    back = smio.read_affinity(p)
    assert back.epoch_count == 8
    assert back.labels == ("x", "y")
    np.testing.assert_array_equal(back.entries, am.entries)


def test_trace_round_trip(tmp_path, rng):
    sigs = [Signal(rng.standard_normal(128), 100.0, channel_id=f"c{i}")
            for i in range(4)]
    trace = smc_cluster(sigs, SmoothingConfig(bandwidth=24, grid_size=64))
    p = tmp_path / "trace.csv"
    smio.write_trace(p, trace)
    back = smio.read_trace(p)
    assert back.channel_ids == trace.channel_ids
    np.testing.assert_array_equal(back.costs, trace.costs)
    for s1, s2 in zip(trace.steps, back.steps):
        assert s1.k_before == s2.k_before
        assert s1.pair == s2.pair
        assert s1.cost == s2.cost
        assert s1.members == s2.members


def test_sim_table_round_trip(tmp_path):
    sims = {"smc_tvd": np.array([1.0, 0.8]),
            "complete_dnp": np.array([0.7, 0.9])}
    p = tmp_path / "sim.csv"
    smio.write_sim_table(p, sims)
    back = smio.read_sim_table(p)
    assert set(back) == set(sims)
    for k in sims:
        np.testing.assert_array_equal(back[k], sims[k])
