import numpy as np
import pytest

from specmerge import (
    Ar2Params,
    InvalidSignal,
    MixtureDesign,
    UnknownDesign,
    builtin_designs,
    default_latents,
    dirichlet_rows,
    get_design,
    simulate_ar2,
    simulate_mixture,
)


def test_simulate_ar2_deterministic():
    p = Ar2Params(m=1.05, eta=10.0, fs=100.0)
    a = simulate_ar2(p, 500, seed=9)
    b = simulate_ar2(p, 500, seed=9)
    np.testing.assert_array_equal(a.samples, b.samples)
    c = simulate_ar2(p, 500, seed=10)
    assert not np.array_equal(a.samples, c.samples)
    assert len(a) == 500
    assert a.sampling_rate == 100.0


def test_simulate_ar2_rejects_short_series():
    with pytest.raises(InvalidSignal):
        simulate_ar2(Ar2Params(m=1.05, eta=10.0, fs=100.0), 50, seed=0)


def test_simulate_ar2_oscillates_near_eta():
    """Sample autocorrelation of a narrowband AR(2) should cross zero near
    a quarter period of eta."""
    p = Ar2Params(m=1.01, eta=10.0, fs=100.0)
    s = simulate_ar2(p, 4000, seed=3)
    x = s.samples - s.samples.mean()
    r1 = np.dot(x[:-1], x[1:]) / np.dot(x, x)
    # lag-1 autocorrelation of a 10 Hz cycle sampled at 100 Hz: ~cos(0.2 pi)
    assert abs(r1 - np.cos(0.2 * np.pi)) < 0.05


def test_mixture_design_validation():
    rows = [[1.0, 0.0, 0.0, 0.0, 0.0]]
    MixtureDesign(name="ok", coefficients=rows, replicates=2)
    with pytest.raises(ValueError):
        MixtureDesign(name="zero-row", coefficients=[[0.0] * 5], replicates=2)
    with pytest.raises(ValueError):
        MixtureDesign(name="short-row", coefficients=[[1.0, 2.0]], replicates=2)
    with pytest.raises(ValueError):
        MixtureDesign(name="bad", coefficients=rows, replicates=0)
    with pytest.raises(InvalidSignal):
        MixtureDesign(name="bad", coefficients=rows, replicates=2, length=50)


def test_mixture_channel_ids_and_truth():
    d = MixtureDesign(name="d", coefficients=[[1, 0, 0, 0, 0], [0, 1, 0, 0, 0]],
                      replicates=3, length=200, seed=1)
    corpus = simulate_mixture(d)
    ids = [s.channel_id for s in corpus.signals]
    assert ids == ["g1r1", "g1r2", "g1r3", "g2r1", "g2r2", "g2r3"]
    assert corpus.truth.n_clusters == 2
    assert frozenset({"g1r1", "g1r2", "g1r3"}) in corpus.truth.clusters


def test_mixture_determinism_and_seed_sensitivity():
    d1 = MixtureDesign(name="d", coefficients=[[1, 1, 0, 0, 0]],
                       replicates=2, length=200, seed=5)
    a = simulate_mixture(d1)
    b = simulate_mixture(d1)
    for sa, sb in zip(a.signals, b.signals):
        np.testing.assert_array_equal(sa.samples, sb.samples)
    d2 = MixtureDesign(name="d", coefficients=[[1, 1, 0, 0, 0]],
                       replicates=2, length=200, seed=6)
    c = simulate_mixture(d2)
    assert not np.array_equal(a.signals[0].samples, c.signals[0].samples)


def test_shared_latents_collapse_replicate_variation():
    """With one latent realization per draw and no observation noise,
    replicates of the same mixing row are identical; with fresh latents
    they are not."""
    d = MixtureDesign(name="d", coefficients=[[0, 0, 1, 0, 0]],
                      replicates=2, noise_sd=0.0, length=300, seed=2)
    shared = simulate_mixture(d, shared_latents=True)
    np.testing.assert_array_equal(shared.signals[0].samples,
                                  shared.signals[1].samples)
    fresh = simulate_mixture(d, shared_latents=False)
    assert not np.array_equal(fresh.signals[0].samples,
                              fresh.signals[1].samples)


def test_noise_changes_but_latent_structure_remains(rng):
    d0 = MixtureDesign(name="d", coefficients=[[1, 0, 0, 0, 0]],
                       replicates=1, noise_sd=0.0, length=300, seed=8)
    d1 = MixtureDesign(name="d", coefficients=[[1, 0, 0, 0, 0]],
                       replicates=1, noise_sd=1.0, length=300, seed=8)
    clean = simulate_mixture(d0).signals[0].samples
    noisy = simulate_mixture(d1).signals[0].samples
    resid = noisy - clean
    # latent innovations are drawn before noise, so the residual is exactly
    # the unit-variance observation noise
    assert abs(resid.std() - 1.0) < 0.15
    assert not np.array_equal(clean, noisy)


def test_default_latents_cover_standard_bands():
    etas = [p.eta for p in default_latents()]
    assert etas == [2.0, 6.0, 10.0, 21.0, 40.0]
    assert all(p.m == 1.01 for p in default_latents())


def test_builtin_designs_catalog():
    designs = builtin_designs()
    assert set(designs) == {"design1", "design2", "design3", "design4"}
    assert designs["design1"].replicates == 10
    assert designs["design2"].replicates == 3
    for d in designs.values():
        assert len(d.coefficients) == 5
        assert d.length == 1000
    with pytest.raises(UnknownDesign):
        get_design("design9")


def test_design4_rows_are_dirichlet():
    rows = np.asarray(get_design("design4").coefficients)
    assert rows.shape == (5, 5)
    assert np.all(rows >= 0)
    np.testing.assert_allclose(rows.sum(axis=1), 1.0, atol=1e-12)
    # reproducible draw
    np.testing.assert_array_equal(rows, np.asarray(get_design("design4").coefficients))


def test_dirichlet_rows_seeded():
    a = dirichlet_rows(3)
    b = dirichlet_rows(3)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, dirichlet_rows(4))
