"""Hot numeric kernels with optional Numba acceleration.

Every kernel exists twice: a Numba ``@njit`` build (``*_nb``) and a pure
NumPy build (``*_np``). The public names dispatch to one of the two at
import time:

* Numba is used when it imports cleanly, unless the environment variable
  ``SPECMERGE_DISABLE_NUMBA`` is set to a truthy value (``1``, ``true``,
  ``yes``), in which case the NumPy path is selected.
* If Numba is unavailable the NumPy path is used silently.

Both paths compute the same quantities; they agree to ~1e-12 relative
(the NumPy autocovariance path goes through an FFT, the Numba path is a
direct sum). ``benchmarks/bench_kernels.py`` times the two side by side.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.fft import next_fast_len
from scipy.signal import lfilter


def _env_disables_numba() -> bool:
    return os.environ.get("SPECMERGE_DISABLE_NUMBA", "").strip().lower() in (
        "1", "true", "yes", "on",
    )


try:
    from numba import njit as _njit

    _NUMBA_IMPORTED = True
except ImportError:  # pragma: no cover
    _NUMBA_IMPORTED = False

    def _njit(*args, **kwargs):
        def deco(f):
            return f

        return deco


_USE_NUMBA = _NUMBA_IMPORTED and not _env_disables_numba()


def backend() -> str:
    """Return the active kernel backend, "numba" or "numpy"."""
    return "numba" if _USE_NUMBA else "numpy"


# Autocovariance ---------------------------------------------------------
#
# Biased estimator on an already mean-centered series:
#   acov[h] = (1/T) * sum_{t=0}^{T-h-1} x[t] * x[t+h],  h = 0..h_max


@_njit(cache=True, nogil=True)
def _autocov_nb(x: np.ndarray, h_max: int) -> np.ndarray:
    t = x.shape[0]
    out = np.empty(h_max + 1, dtype=np.float64)
    for h in range(h_max + 1):
        s = 0.0
        for i in range(t - h):
            s += x[i] * x[i + h]
        out[h] = s / t
    return out


def _autocov_np(x: np.ndarray, h_max: int) -> np.ndarray:
    t = x.shape[0]
    nfft = next_fast_len(t + h_max + 1)
    fx = np.fft.rfft(x, nfft)
    r = np.fft.irfft(fx * np.conj(fx), nfft)
    return r[: h_max + 1] / t


# Cross-covariance -------------------------------------------------------
#
#   cpos[h] = (1/T) * sum_t x[t] * y[t+h]   (h = 0..h_max)
#   cneg[h] = (1/T) * sum_t y[t] * x[t+h]
#
# cpos is the lag-h cross-covariance of (x, y); cneg covers negative lags.


@_njit(cache=True, nogil=True)
def _crosscov_nb(x: np.ndarray, y: np.ndarray, h_max: int):
    t = x.shape[0]
    cpos = np.empty(h_max + 1, dtype=np.float64)
    cneg = np.empty(h_max + 1, dtype=np.float64)
    for h in range(h_max + 1):
        sp = 0.0
        sn = 0.0
        for i in range(t - h):
            sp += x[i] * y[i + h]
            sn += y[i] * x[i + h]
        cpos[h] = sp / t
        cneg[h] = sn / t
    return cpos, cneg


def _crosscov_np(x: np.ndarray, y: np.ndarray, h_max: int):
    t = x.shape[0]
    nfft = next_fast_len(t + h_max + 1)
    fx = np.fft.rfft(x, nfft)
    fy = np.fft.rfft(y, nfft)
    r = np.fft.irfft(fx * np.conj(fy), nfft)
    # r[h] = sum_t x[t+h] * y[t]; wrap-around indices give the other sign.
    cneg = r[: h_max + 1] / t
    cpos = np.empty(h_max + 1, dtype=np.float64)
    cpos[0] = cneg[0]
    if h_max > 0:
        cpos[1:] = r[nfft - h_max : nfft][::-1] / t
    return cpos, cneg


# Lag-window transform ---------------------------------------------------
#
# Evaluate  s(w) = wgt[0]*acov[0] + 2 * sum_{h=1}^{a} wgt[h]*acov[h]*cos(2 pi w h)
# on an arbitrary frequency vector (cycles per sample).


@_njit(cache=True, nogil=True)
def _lag_window_eval_nb(acov: np.ndarray, wgt: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    a = wgt.shape[0] - 1
    out = np.empty(freqs.shape[0], dtype=np.float64)
    for k in range(freqs.shape[0]):
        ang = 2.0 * np.pi * freqs[k]
        s = wgt[0] * acov[0]
        for h in range(1, a + 1):
            s += 2.0 * wgt[h] * acov[h] * np.cos(ang * h)
        out[k] = s
    return out


def _lag_window_eval_np(acov: np.ndarray, wgt: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    a = wgt.shape[0] - 1
    h = np.arange(1, a + 1)
    cos_table = np.cos(2.0 * np.pi * np.outer(freqs, h))
    return wgt[0] * acov[0] + 2.0 * (cos_table @ (wgt[1:] * acov[1 : a + 1]))


# Complex cross-spectrum via the same window ------------------------------
#
# re(w) = wgt[0]*cpos[0] + sum_{h>=1} wgt[h] * (cpos[h] + cneg[h]) * cos(2 pi w h)
# im(w) =                  sum_{h>=1} wgt[h] * (cneg[h] - cpos[h]) * sin(2 pi w h)


@_njit(cache=True, nogil=True)
def _cross_spectrum_eval_nb(cpos, cneg, wgt, freqs):
    a = wgt.shape[0] - 1
    re = np.empty(freqs.shape[0], dtype=np.float64)
    im = np.empty(freqs.shape[0], dtype=np.float64)
    for k in range(freqs.shape[0]):
        ang = 2.0 * np.pi * freqs[k]
        sr = wgt[0] * cpos[0]
        si = 0.0
        for h in range(1, a + 1):
            c = np.cos(ang * h)
            s = np.sin(ang * h)
            sr += wgt[h] * (cpos[h] + cneg[h]) * c
            si += wgt[h] * (cneg[h] - cpos[h]) * s
        re[k] = sr
        im[k] = si
    return re, im


def _cross_spectrum_eval_np(cpos, cneg, wgt, freqs):
    a = wgt.shape[0] - 1
    h = np.arange(1, a + 1)
    ang = 2.0 * np.pi * np.outer(freqs, h)
    re = wgt[0] * cpos[0] + np.cos(ang) @ (wgt[1:] * (cpos[1:] + cneg[1:]))
    im = np.sin(ang) @ (wgt[1:] * (cneg[1:] - cpos[1:]))
    return re, im


# Total variation distance ------------------------------------------------
#
# For unit-integral rows of `dens` (Riemann sum with step dx):
#   tvd(i, j) = 1 - dx * sum_k min(dens[i, k], dens[j, k])


@_njit(cache=True, nogil=True)
def _tvd_matrix_nb(dens: np.ndarray, dx: float) -> np.ndarray:
    n = dens.shape[0]
    m = dens.shape[1]
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for k in range(m):
                a = dens[i, k]
                b = dens[j, k]
                s += a if a < b else b
            d = 1.0 - dx * s
            if d < 0.0:
                d = 0.0
            elif d > 1.0:
                d = 1.0
            out[i, j] = d
            out[j, i] = d
    return out


def _tvd_matrix_np(dens: np.ndarray, dx: float) -> np.ndarray:
    n = dens.shape[0]
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n - 1):
        d = 1.0 - dx * np.minimum(dens[i], dens[i + 1 :]).sum(axis=1)
        np.clip(d, 0.0, 1.0, out=d)
        out[i, i + 1 :] = d
        out[i + 1 :, i] = d
    return out


@_njit(cache=True, nogil=True)
def _tvd_vec_nb(f: np.ndarray, dens: np.ndarray, dx: float) -> np.ndarray:
    n = dens.shape[0]
    m = dens.shape[1]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        s = 0.0
        for k in range(m):
            a = f[k]
            b = dens[i, k]
            s += a if a < b else b
        d = 1.0 - dx * s
        if d < 0.0:
            d = 0.0
        elif d > 1.0:
            d = 1.0
        out[i] = d
    return out


def _tvd_vec_np(f: np.ndarray, dens: np.ndarray, dx: float) -> np.ndarray:
    d = 1.0 - dx * np.minimum(dens, f).sum(axis=1)
    return np.clip(d, 0.0, 1.0)


# AR(2) recursion ---------------------------------------------------------
#
#   z[t] = phi1*z[t-1] + phi2*z[t-2] + eps[t],  z[-1] = z[-2] = 0.


@_njit(cache=True, nogil=True)
def _ar2_recursion_nb(phi1: float, phi2: float, eps: np.ndarray) -> np.ndarray:
    n = eps.shape[0]
    z = np.empty(n, dtype=np.float64)
    z1 = 0.0
    z2 = 0.0
    for t in range(n):
        zt = (phi1 * z1 + phi2 * z2) + eps[t]
        z[t] = zt
        z2 = z1
        z1 = zt
    return z


def _ar2_recursion_np(phi1: float, phi2: float, eps: np.ndarray) -> np.ndarray:
    return lfilter([1.0], [1.0, -phi1, -phi2], eps)


# Dispatch ----------------------------------------------------------------

if _USE_NUMBA:
    autocov = _autocov_nb
    crosscov = _crosscov_nb
    lag_window_eval = _lag_window_eval_nb
    cross_spectrum_eval = _cross_spectrum_eval_nb
    tvd_matrix = _tvd_matrix_nb
    tvd_vec = _tvd_vec_nb
    ar2_recursion = _ar2_recursion_nb
else:
    autocov = _autocov_np
    crosscov = _crosscov_np
    lag_window_eval = _lag_window_eval_np
    cross_spectrum_eval = _cross_spectrum_eval_np
    tvd_matrix = _tvd_matrix_np
    tvd_vec = _tvd_vec_np
    ar2_recursion = _ar2_recursion_np
