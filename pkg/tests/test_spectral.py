import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specmerge import (
    DegenerateSpectrum,
    FrequencyGrid,
    GridMismatch,
    InvalidBandwidth,
    InvalidLag,
    InvalidSignal,
    NonCausal,
    Signal,
    SmoothingConfig,
    SpectralDensity,
    ar2_coefficients,
    ar2_spectrum,
    autocovariance,
    estimate_normalized_spectrum,
    fourier_frequencies,
    gcv_select_bandwidth,
    normalize_density,
    parzen_weight,
    parzen_weights,
    periodogram,
    simulate_ar2,
    smoothed_periodogram,
    squared_coherence,
    uniform_grid,
)
from specmerge.simulate import Ar2Params


# -- Signal and grid containers ------------------------------------------


def test_signal_rejects_bad_input():
    with pytest.raises(InvalidSignal):
        Signal(np.array([1.0, 2.0, 3.0]), 100.0)  # under 4 samples
    with pytest.raises(InvalidSignal):
        Signal(np.array([1.0, np.nan, 3.0, 4.0]), 100.0)
    with pytest.raises(InvalidSignal):
        Signal(np.arange(8.0), 0.0)


def test_grid_validation():
    FrequencyGrid(np.array([0.0, 0.25, 0.5]))
    with pytest.raises(ValueError):
        FrequencyGrid(np.array([0.5]))
    with pytest.raises(ValueError):
        FrequencyGrid(np.array([0.0, 0.6]))
    with pytest.raises(ValueError):
        FrequencyGrid(np.array([0.0, 0.3, 0.2]))
    with pytest.raises(ValueError):
        FrequencyGrid(np.array([0.0, 0.1, 0.5]))  # non-uniform spacing


def test_uniform_grid_spans_half_cycle():
    g = uniform_grid(256)
    assert g.points[0] == 0.0
    assert g.points[-1] == 0.5
    assert g.points.size == 256
    with pytest.raises(ValueError):
        uniform_grid(7)


def test_density_normalization_check():
    g = uniform_grid(16)
    vals = np.ones(16)
    with pytest.raises(ValueError):
        SpectralDensity(grid=g, values=vals, normalized=True)  # integral is 0.5, not 1
    d = normalize_density(SpectralDensity(grid=g, values=vals, normalized=False))
    assert abs(d.riemann_sum() - 1.0) < 1e-12
    with pytest.raises(DegenerateSpectrum):
        normalize_density(SpectralDensity(grid=g, values=np.zeros(16), normalized=False))


# -- Autocovariance and periodogram --------------------------------------


def test_autocovariance_hand_case():
    # alternating series, mean zero: acov(0)=1, acov(1)=-3/4 with divisor T
    s = Signal(np.array([1.0, -1.0, 1.0, -1.0]), 1.0)
    acov = autocovariance(s, 1)
    np.testing.assert_allclose(acov.values, [1.0, -0.75], atol=1e-15)
    with pytest.raises(InvalidLag):
        autocovariance(s, 4)
    with pytest.raises(InvalidLag):
        autocovariance(s, -1)


def test_autocovariance_is_mean_centered(rng):
    x = rng.standard_normal(128)
    a = autocovariance(Signal(x, 1.0), 3)
    b = autocovariance(Signal(x + 100.0, 1.0), 3)
    np.testing.assert_allclose(a.values, b.values, atol=1e-9)


def test_fourier_frequencies_count():
    np.testing.assert_allclose(fourier_frequencies(10).points,
                               [0.1, 0.2, 0.3, 0.4])
    assert fourier_frequencies(11).points.size == 5
    assert fourier_frequencies(1000).points.size == 499


def test_periodogram_cosine_peak():
    """A pure cosine at a Fourier frequency carries T/4 at its own bin."""
    t, k0 = 64, 16
    x = np.cos(2 * np.pi * k0 * np.arange(t) / t)
    p = periodogram(Signal(x, 1.0))
    k_hat = int(np.argmax(p.values))
    assert p.grid.points[k_hat] == pytest.approx(k0 / t)
    assert p.values[k_hat] == pytest.approx(t / 4, rel=1e-12)
    others = np.delete(p.values, k_hat)
    assert np.all(others < 1e-20)


# -- Parzen window and smoothing ------------------------------------------


def test_parzen_weight_hand_values():
    assert parzen_weight(0.0) == 1.0
    assert parzen_weight(0.25) == pytest.approx(0.71875, abs=1e-15)
    assert parzen_weight(0.5) == pytest.approx(0.25, abs=1e-15)
    assert parzen_weight(0.75) == pytest.approx(0.03125, abs=1e-15)
    assert parzen_weight(1.0) == 0.0
    assert parzen_weight(-0.25) == parzen_weight(0.25)


@given(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
def test_parzen_weight_bounded(u):
    w = parzen_weight(u)
    assert 0.0 <= w <= 1.0


def test_parzen_weights_vector_matches_scalar():
    a = 12
    w = parzen_weights(a)
    assert w.shape == (a + 1,)
    for h in range(a + 1):
        assert w[h] == pytest.approx(parzen_weight(h / a), abs=1e-15)


def test_smoothed_periodogram_nonnegative(rng):
    cfg = SmoothingConfig(bandwidth=32, grid_size=128)
    for _ in range(5):
        s = Signal(rng.standard_normal(200), 50.0)
        d = smoothed_periodogram(s, cfg)
        assert np.all(d.values >= 0.0)
        assert d.grid.points.size == 128


def test_bandwidth_must_be_below_length(noise_signal):
    with pytest.raises(InvalidBandwidth):
        smoothed_periodogram(noise_signal, SmoothingConfig(bandwidth=256))
    with pytest.raises(InvalidBandwidth):
        SmoothingConfig(bandwidth=0)


def test_estimate_normalized_spectrum_integrates_to_one(noise_signal, small_cfg):
    d = estimate_normalized_spectrum(noise_signal, small_cfg)
    assert d.normalized
    assert abs(d.riemann_sum() - 1.0) < 1e-10


# -- AR(2) helpers ---------------------------------------------------------


def test_ar2_coefficients_reference_values():
    phi1, phi2 = ar2_coefficients(1.1, 10.0, 100.0)
    assert phi1 == pytest.approx(2 * np.cos(0.2 * np.pi) / 1.1, abs=1e-15)
    assert phi2 == pytest.approx(-1 / 1.21, abs=1e-15)
    with pytest.raises(NonCausal):
        ar2_coefficients(1.0, 10.0, 100.0)
    with pytest.raises(ValueError):
        ar2_coefficients(1.1, 50.0, 100.0)  # at Nyquist
    with pytest.raises(ValueError):
        ar2_coefficients(1.1, 0.0, 100.0)


def test_ar2_spectrum_peak_location():
    """Theoretical argmax: cos(2 pi w*) = phi1 (1 - phi2) / (-4 phi2)."""
    m, eta, fs = 1.01, 10.0, 100.0
    phi1, phi2 = ar2_coefficients(m, eta, fs)
    grid = uniform_grid(4096)
    dens = ar2_spectrum(m, eta, fs, grid)
    w_hat = grid.points[int(np.argmax(dens.values))]
    w_star = np.arccos(phi1 * (1 - phi2) / (-4 * phi2)) / (2 * np.pi)
    assert abs(w_hat - w_star) <= grid.spacing


def test_ar2_spectrum_rejects_nonstationary():
    grid = uniform_grid(64)
    with pytest.raises(NonCausal):
        ar2_spectrum(1.0, 10.0, 100.0, grid)  # root on the unit circle


# -- GCV bandwidth selection ----------------------------------------------


def test_gcv_returns_candidate_and_is_deterministic():
    s = simulate_ar2(Ar2Params(m=1.05, eta=10.0, fs=100.0), 500, seed=4)
    cands = (10, 25, 50, 100)
    a1 = gcv_select_bandwidth(s, cands)
    a2 = gcv_select_bandwidth(s, cands)
    assert a1 == a2
    assert a1 in cands


def test_gcv_prefers_resolution_for_peaked_spectrum():
    # a=2 smears a sharp AR(2) peak flat; GCV must not choose it
    s = simulate_ar2(Ar2Params(m=1.05, eta=10.0, fs=100.0), 1000, seed=7)
    assert gcv_select_bandwidth(s, (2, 100)) == 100


def test_gcv_rejects_hopeless_candidates(noise_signal):
    with pytest.raises(InvalidBandwidth):
        gcv_select_bandwidth(noise_signal, (512,))  # >= T
    with pytest.raises(InvalidBandwidth):
        gcv_select_bandwidth(noise_signal, ())


# -- Coherence -------------------------------------------------------------


def test_coherence_of_signal_with_itself_is_one(small_cfg, rng):
    x = Signal(rng.standard_normal(300), 100.0)
    coh = squared_coherence(x, x, small_cfg)
    np.testing.assert_allclose(coh.values, 1.0, atol=1e-10)


def test_coherence_bounded(small_cfg, rng):
    x = Signal(rng.standard_normal(300), 100.0)
    y = Signal(rng.standard_normal(300), 100.0)
    coh = squared_coherence(x, y, small_cfg)
    assert np.all((coh.values >= 0.0) & (coh.values <= 1.0))


def test_coherence_requires_matching_signals(small_cfg, rng):
    x = Signal(rng.standard_normal(300), 100.0)
    with pytest.raises(GridMismatch):
        squared_coherence(x, Signal(rng.standard_normal(200), 100.0), small_cfg)
    with pytest.raises(GridMismatch):
        squared_coherence(x, Signal(rng.standard_normal(300), 128.0), small_cfg)
