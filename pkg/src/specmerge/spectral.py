"""Spectral density estimation for stationary time series.

Implements the estimation chain used by the clustering pipeline:
sample autocovariance, raw periodogram, Parzen lag-window smoothing,
normalization to unit integral, Gamma-deviance GCV bandwidth selection,
the analytic AR(2) spectrum, and squared coherence.

All frequencies are in cycles per sample, on one-sided grids over
[0, 0.5]. Spectra are even, so nothing is lost by folding; normalization
is performed on the one-sided grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    DegenerateSpectrum,
    GridMismatch,
    InvalidBandwidth,
    InvalidLag,
    InvalidSignal,
    NonCausal,
)

#: EEG-convention frequency bands in Hz, for reporting.
FREQUENCY_BANDS_HZ = {
    "delta": (0.0, 4.0),
    "theta": (4.0, 8.0),
    "alpha": (8.0, 12.0),
    "beta": (12.0, 30.0),
    "gamma": (30.0, 50.0),
}

_TWO_PI = 2.0 * np.pi


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Signal:
    """A single real-valued channel sampled at a fixed rate.

    Parameters
    ----------
    samples : array_like
        The observations; at least 4 finite values.
    sampling_rate : float
        Samples per second (Hz), > 0.
    channel_id : str
        Opaque label used in reports and file headers.
    """

    samples: np.ndarray
    sampling_rate: float
    channel_id: str = ""

    def __post_init__(self):
        samples = _frozen_array(self.samples)
        if samples.ndim != 1 or samples.size < 4:
            raise InvalidSignal(
                f"signal needs at least 4 samples, got shape {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            raise InvalidSignal("signal contains non-finite samples")
        if not self.sampling_rate > 0:
            raise InvalidSignal(f"sampling_rate must be > 0, got {self.sampling_rate}")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class AutocovarianceSeq:
    """Sample autocovariances at lags 0..h_max (biased, divisor T)."""

    values: np.ndarray
    series_length: int

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform one-sided frequency grid in cycles per sample."""

    points: np.ndarray
    spacing: float = field(init=False)

    def __post_init__(self):
        points = _frozen_array(self.points)
        if points.ndim != 1 or points.size < 2:
            raise ValueError("frequency grid needs at least 2 points")
        if points[0] < 0.0 or points[-1] > 0.5 + 1e-12:
            raise ValueError("grid points must lie in [0, 0.5] cycles/sample")
        diffs = np.diff(points)
        if np.any(diffs <= 0):
            raise ValueError("grid points must be strictly increasing")
        step = diffs[0]
        if np.any(np.abs(diffs - step) > 1e-12 * max(step, 1.0)):
            raise ValueError("grid spacing must be uniform")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "spacing", float(step))

    def __len__(self) -> int:
        return self.points.size

    def matches(self, other: "FrequencyGrid") -> bool:
        return self.points.size == other.points.size and np.allclose(
            self.points, other.points, rtol=0.0, atol=1e-12
        )


def uniform_grid(n_points: int) -> FrequencyGrid:
    """Build the shared analysis grid: n_points evenly spaced over [0, 0.5].

    Analysis grids need at least 8 points so discrete integrals are
    meaningful; smaller grids can still be constructed directly for
    special cases.
    """
    if n_points < 8:
        raise ValueError(f"analysis grid needs at least 8 points, got {n_points}")
    return FrequencyGrid(np.linspace(0.0, 0.5, n_points))


@dataclass(frozen=True)
class SpectralDensity:
    """Spectral density values on a frequency grid.

    ``normalized`` marks densities whose discrete Riemann sum over the
    grid equals 1; ``variance`` records the sample variance that was
    divided out during normalization, when known.
    """

    grid: FrequencyGrid
    values: np.ndarray
    normalized: bool = False
    variance: float | None = None

    def __post_init__(self):
        values = _frozen_array(self.values)
        if values.shape != self.grid.points.shape:
            raise ValueError("density values must match the grid shape")
        if not np.all(np.isfinite(values)):
            raise ValueError("density values must be finite")
        if np.any(values < 0.0):
            raise ValueError("density values must be nonnegative (clip upstream)")
        if self.normalized:
            total = values.sum() * self.grid.spacing
            if abs(total - 1.0) > 1e-8:
                raise ValueError(
                    f"normalized density must integrate to 1, got {total!r}"
                )
        object.__setattr__(self, "values", values)

    def riemann_sum(self) -> float:
        return float(self.values.sum() * self.grid.spacing)


@dataclass(frozen=True)
class SmoothingConfig:
    """Lag-window smoothing configuration.

    bandwidth: number of autocovariance lags retained (must stay below
    the series length). grid_size: number of evaluation frequencies on
    the shared [0, 0.5] grid.
    """

    bandwidth: int = 100
    grid_size: int = 512

    def __post_init__(self):
        if self.bandwidth < 1:
            raise InvalidBandwidth(f"bandwidth must be >= 1, got {self.bandwidth}")
        if self.grid_size < 8:
            raise ValueError(f"grid_size must be >= 8, got {self.grid_size}")

    def grid(self) -> FrequencyGrid:
        return uniform_grid(self.grid_size)


# -- Autocovariance and periodogram ---------------------------------------


def autocovariance(signal: Signal, h_max: int) -> AutocovarianceSeq:
    """Biased sample autocovariance of a signal at lags 0..h_max.

    Uses divisor T and mean-centering, which keeps the sequence
    nonnegative definite (required for lag-window estimation).
    """
    t = len(signal)
    if not 0 <= h_max < t:
        raise InvalidLag(f"h_max must be in [0, {t - 1}], got {h_max}")
    centered = np.ascontiguousarray(signal.samples - signal.samples.mean())
    values = _kernels.autocov(centered, int(h_max))
    return AutocovarianceSeq(values=values, series_length=t)


def fourier_frequencies(t: int) -> FrequencyGrid:
    """Fundamental Fourier frequencies k/T, k = 1..floor((T-1)/2)."""
    n = (t - 1) // 2
    if n < 2:
        raise InvalidSignal(f"series too short for a Fourier grid (T={t})")
    return FrequencyGrid(np.arange(1, n + 1) / t)


def periodogram(signal: Signal) -> SpectralDensity:
    """Raw periodogram at the fundamental Fourier frequencies.

    The signal is mean-centered first; ordinates are |DFT|^2 / T at
    frequencies k/T for k = 1..floor((T-1)/2). The result is not
    normalized.
    """
    t = len(signal)
    grid = fourier_frequencies(t)
    centered = signal.samples - signal.samples.mean()
    dft = np.fft.rfft(centered)
    n = (t - 1) // 2
    vals = (dft.real[1 : n + 1] ** 2 + dft.imag[1 : n + 1] ** 2) / t
    # |.|^2 is nonnegative up to rounding dust.
    vals = np.maximum(vals, 0.0)
    return SpectralDensity(grid=grid, values=vals, normalized=False,
                           variance=float(centered @ centered / t))


# -- Parzen window ---------------------------------------------------------


def parzen_weight(u: float) -> float:
    """Parzen lag-window weight: piecewise cubic on [-1, 1], 0 outside."""
    au = abs(u)
    if au < 0.5:
        return 1.0 - 6.0 * au**2 + 6.0 * au**3
    if au <= 1.0:
        return 2.0 * (1.0 - au) ** 3
    return 0.0


def parzen_weights(bandwidth: int) -> np.ndarray:
    """Vector of Parzen weights w(h/a) for h = 0..a."""
    h = np.arange(bandwidth + 1, dtype=np.float64)
    u = h / bandwidth
    w = np.where(
        u < 0.5,
        1.0 - 6.0 * u**2 + 6.0 * u**3,
        2.0 * (1.0 - np.minimum(u, 1.0)) ** 3,
    )
    return w


def _check_bandwidth(bandwidth: int, t: int):
    if bandwidth >= t:
        raise InvalidBandwidth(
            f"bandwidth {bandwidth} must be below the series length {t}"
        )
    if bandwidth < 1:
        raise InvalidBandwidth(f"bandwidth must be >= 1, got {bandwidth}")


def smoothed_periodogram(signal: Signal, cfg: SmoothingConfig) -> SpectralDensity:
    """Parzen lag-window estimate of the spectral density.

    Evaluates (2 pi)^-1 * sum_{|h| <= a} w(h/a) acov(|h|) cos(2 pi w h)
    on the configured uniform grid over [0, 0.5]. The Parzen window has a
    nonnegative spectral kernel, so negative outputs only ever arise from
    rounding; they are clipped to 0.
    """
    t = len(signal)
    _check_bandwidth(cfg.bandwidth, t)
    acov = autocovariance(signal, cfg.bandwidth)
    wgt = parzen_weights(cfg.bandwidth)
    grid = cfg.grid()
    vals = _kernels.lag_window_eval(acov.values, wgt, grid.points) / _TWO_PI
    vals = np.maximum(vals, 0.0)
    return SpectralDensity(grid=grid, values=vals, normalized=False,
                           variance=float(acov.values[0]))


def normalize_density(d: SpectralDensity) -> SpectralDensity:
    """Rescale a density so its discrete Riemann sum over the grid is 1.

    Idempotent on already-normalized inputs (up to rounding).
    """
    total = d.riemann_sum()
    if total <= 0.0:
        raise DegenerateSpectrum("cannot normalize an all-zero density")
    return SpectralDensity(
        grid=d.grid,
        values=d.values / total,
        normalized=True,
        variance=d.variance,
    )


def estimate_normalized_spectrum(signal: Signal, cfg: SmoothingConfig) -> SpectralDensity:
    """Smoothed periodogram, normalized to unit integral."""
    return normalize_density(smoothed_periodogram(signal, cfg))


# -- Bandwidth selection ---------------------------------------------------


def _gamma_deviance_sum(ordinates: np.ndarray, fitted: np.ndarray) -> tuple[float, int]:
    pos = ordinates > 0.0
    n = int(pos.sum())
    if n == 0:
        raise DegenerateSpectrum("all periodogram ordinates are zero")
    fmax = fitted.max()
    if fmax <= 0.0:
        raise DegenerateSpectrum("fitted spectrum is nonpositive everywhere")
    f = np.maximum(fitted[pos], 1e-12 * fmax)
    r = ordinates[pos] / f
    return float(np.sum(r - np.log(r) - 1.0)), n


def gcv_select_bandwidth(signal: Signal, candidates) -> int:
    """Select a Parzen bandwidth by Gamma-deviance generalized CV.

    For each candidate a the raw periodogram ordinates I_k are compared
    against the lag-window fit at the same Fourier frequencies through
    the Gamma deviance dev(I, f) = I/f - log(I/f) - 1, summed over the
    ordinates with I_k > 0. The mean deviance is inflated by the usual
    GCV factor (1 - p)^-2, where p = sum_{|h| <= a} w(h/a) / T is the
    trace fraction of the induced frequency-domain smoother. Returns the
    candidate minimizing the criterion; ties break toward larger a.
    """
    cands = sorted(set(int(a) for a in candidates))
    if not cands:
        raise InvalidBandwidth("candidate list is empty")
    t = len(signal)
    for a in cands:
        _check_bandwidth(a, t)
    raw = periodogram(signal)
    acov = autocovariance(signal, max(cands))
    best_a = None
    best_val = np.inf
    for a in cands:
        wgt = parzen_weights(a)
        p = (wgt[0] + 2.0 * wgt[1:].sum()) / t
        if p >= 1.0:
            raise InvalidBandwidth(
                f"bandwidth {a} saturates the smoother (trace fraction {p:.3f})"
            )
        # Fit on the same scale as the raw ordinates (no 2 pi factor), so
        # the deviance compares like with like.
        fitted = _kernels.lag_window_eval(acov.values[: a + 1], wgt, raw.grid.points)
        dev, n = _gamma_deviance_sum(raw.values, fitted)
        val = (dev / n) / (1.0 - p) ** 2
        if val <= best_val:
            best_val = val
            best_a = a
    return best_a


# -- Analytic AR(2) spectrum ----------------------------------------------


def ar2_transfer_coefficients(m: float, eta: float, fs: float) -> tuple[float, float]:
    """AR(2) coefficients with characteristic roots of modulus m and
    argument 2*pi*eta/fs."""
    if m <= 1.0:
        raise NonCausal(f"root modulus must exceed 1 for causality, got {m}")
    if not 0.0 < eta < fs / 2.0:
        raise ValueError(f"peak frequency must lie in (0, fs/2), got {eta}")
    phi1 = 2.0 * np.cos(2.0 * np.pi * eta / fs) / m
    phi2 = -1.0 / m**2
    return phi1, phi2


def ar2_spectrum(m: float, eta: float, fs: float, grid: FrequencyGrid) -> SpectralDensity:
    """Analytic spectral density of the AR(2) oscillation model.

    f(w) = sigma^2 / |1 - phi1 e^{-i 2 pi w} - phi2 e^{-i 4 pi w}|^2 with
    unit innovation variance, evaluated on the given grid. The peak sits
    near eta/fs and narrows as m approaches 1 from above.
    """
    phi1, phi2 = ar2_transfer_coefficients(m, eta, fs)
    z = np.exp(-2j * np.pi * grid.points)
    denom = np.abs(1.0 - phi1 * z - phi2 * z**2) ** 2
    return SpectralDensity(grid=grid, values=1.0 / denom, normalized=False)


# -- Squared coherence -----------------------------------------------------


def squared_coherence(x: Signal, y: Signal, cfg: SmoothingConfig) -> SpectralDensity:
    """Magnitude-squared coherence via Parzen-smoothed cross-spectra.

    |f_xy|^2 / (f_xx * f_yy) on the configured grid, clipped to [0, 1].
    Low coherence does not imply dissimilar spectra: two independent
    draws of the same process have coherence near zero yet nearly
    identical normalized spectral densities.
    """
    if len(x) != len(y):
        raise GridMismatch("coherence inputs must have equal lengths")
    if x.sampling_rate != y.sampling_rate:
        raise GridMismatch("coherence inputs must share a sampling rate")
    t = len(x)
    _check_bandwidth(cfg.bandwidth, t)
    a = cfg.bandwidth
    wgt = parzen_weights(a)
    grid = cfg.grid()

    xc = np.ascontiguousarray(x.samples - x.samples.mean())
    yc = np.ascontiguousarray(y.samples - y.samples.mean())
    sxx = _kernels.lag_window_eval(_kernels.autocov(xc, a), wgt, grid.points)
    syy = _kernels.lag_window_eval(_kernels.autocov(yc, a), wgt, grid.points)
    if np.any(sxx <= 0.0) or np.any(syy <= 0.0):
        raise DegenerateSpectrum("auto-spectrum vanishes on the grid")
    cpos, cneg = _kernels.crosscov(xc, yc, a)
    re, im = _kernels.cross_spectrum_eval(cpos, cneg, wgt, grid.points)
    coh = (re**2 + im**2) / (sxx * syy)
    return SpectralDensity(grid=grid, values=np.clip(coh, 0.0, 1.0), normalized=False)
