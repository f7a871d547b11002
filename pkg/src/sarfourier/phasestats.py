"""Second-moment statistics of Fourier data from random-phase signals.

A random complex signal has fixed magnitudes ``|f_j|`` and phases drawn
uniformly from ``[-pi, pi)``. Everything here works with the discrete
conventions

    f^_k  = sum_j f_j exp(-2 pi i j k / N)
    S f_m = N^-1 sum_{k=K1..K2} f^_k exp(2 pi i m k / N)

with ``j, m = 0..N-1`` and band width ``B = K2 - K1``.

Monte Carlo trial ``t`` always draws its phases from stream ``t`` of the
seed, so results do not depend on batching.
"""
from __future__ import annotations

import csv
import warnings

import numpy as np

from . import _rng
from .kernels import dirichlet
from .scene import ComplexSignal, block_labels

__all__ = [
    "expected_coefficient_power",
    "monte_carlo_coefficient_power",
    "expected_partial_sum_power",
    "monte_carlo_partial_sum_power",
    "correlated_phase_power",
    "probe_indices",
    "write_power_csv",
    "KC_DELTA_WARN",
]

# Warn when K_c * delta (radians, delta measured on the 2 pi domain) exceeds this.
KC_DELTA_WARN = 0.25

_BATCH = 512


def expected_coefficient_power(magnitudes) -> float:
    """``E|f^_k|^2 = sum_j |f_j|^2``, the same for every ``k``."""
    m = np.abs(np.asarray(magnitudes, dtype=float))
    return float(np.sum(m * m))


def _trial_phases(seed, start, stop, n, labels=None):
    n_draw = n if labels is None else int(labels[-1]) + 1
    ph = np.stack([_rng.uniform_phases(seed, n_draw, stream=t) for t in range(start, stop)])
    return ph if labels is None else ph[:, labels]


def _mean_and_stderr(total, total_sq, trials):
    mean = total / trials
    if trials < 2:
        return mean, np.full_like(mean, np.nan)
    var = np.maximum(total_sq / trials - mean * mean, 0.0) * trials / (trials - 1)
    return mean, np.sqrt(var / trials)


def monte_carlo_coefficient_power(magnitudes, ks, trials: int, seed: int):
    """Sample mean and standard error of ``|f^_k|^2`` for each ``k`` in ``ks``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    mag = np.abs(np.asarray(magnitudes, dtype=float))
    n = mag.size
    ks = np.atleast_1d(np.asarray(ks, dtype=np.int64))
    e = np.exp(-2j * np.pi * np.outer(np.arange(n), ks) / n)
    total = np.zeros(ks.size)
    total_sq = np.zeros(ks.size)
    for s in range(0, trials, _BATCH):
        t1 = min(trials, s + _BATCH)
        f = mag * np.exp(1j * _trial_phases(seed, s, t1, n))
        p = np.abs(f @ e) ** 2
        total += p.sum(axis=0)
        total_sq += (p * p).sum(axis=0)
    return _mean_and_stderr(total, total_sq, trials)


def _kernel_sq(b, x):
    return dirichlet(b / 2.0, x) ** 2


def expected_partial_sum_power(magnitudes, b, n_points: int | None = None) -> np.ndarray:
    """``E|S f_m|^2 = N^-2 sum_j |f_j|^2 D_{B/2}(x_m - 2 pi j / N)^2``.

    The result depends on the band only through its width ``b``. With
    ``n_points`` omitted (or equal to ``N``) the points are ``x_m = 2 pi m / N``
    and the sum is a circular convolution; otherwise ``n_points`` equispaced
    points on ``[0, 2 pi)`` are evaluated directly.
    """
    mag = np.abs(np.asarray(magnitudes, dtype=float))
    n = mag.size
    if not 0 <= b < n:
        raise ValueError(f"need 0 <= B < N, got B={b}, N={n}")
    p = mag * mag
    if n_points is None or n_points == n:
        ker = _kernel_sq(b, 2 * np.pi * np.arange(n) / n)
        return np.real(np.fft.ifft(np.fft.fft(p) * np.fft.fft(ker))) / n ** 2
    x = 2 * np.pi * np.arange(n_points) / n_points
    xj = 2 * np.pi * np.arange(n) / n
    return (_kernel_sq(b, x[:, None] - xj[None, :]) @ p) / n ** 2


def _band_mask(n, k1, k2):
    if k2 < k1:
        raise ValueError("need K1 <= K2")
    if k2 - k1 >= n:
        raise ValueError(f"band of {k2 - k1 + 1} coefficients does not fit N={n}")
    mask = np.zeros(n, dtype=bool)
    mask[np.arange(k1, k2 + 1) % n] = True
    return mask


def _mc_partial_sum(mag, k1, k2, trials, seed, labels=None):
    n = mag.size
    mask = _band_mask(n, k1, k2)
    total = np.zeros(n)
    total_sq = np.zeros(n)
    for s in range(0, trials, _BATCH):
        t1 = min(trials, s + _BATCH)
        f = mag * np.exp(1j * _trial_phases(seed, s, t1, n, labels))
        sf = np.fft.ifft(np.fft.fft(f, axis=1) * mask, axis=1)
        p = np.abs(sf) ** 2
        total += p.sum(axis=0)
        total_sq += (p * p).sum(axis=0)
    return _mean_and_stderr(total, total_sq, trials)


def monte_carlo_partial_sum_power(magnitudes, k1: int, k2: int, trials: int, seed: int,
                                  return_stderr: bool = False):
    """Empirical mean of ``|S_{K1,K2} f_m|^2`` over ``trials`` random-phase draws."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    mag = np.abs(np.asarray(magnitudes, dtype=float))
    mean, err = _mc_partial_sum(mag, int(k1), int(k2), trials, seed)
    return (mean, err) if return_stderr else mean


def correlated_phase_power(magnitudes, delta: int, k_c: int, b: int, trials: int,
                           seed: int, warn_factor: float = KC_DELTA_WARN):
    """Partial-sum power when phases are shared across blocks of ``delta`` samples.

    Returns ``(empirical, predicted)``. The prediction is ``delta`` times the
    independent-phase result, which holds while ``|f|`` and the kernel are
    nearly constant across a block and the band centre is small enough that
    ``exp(i K_c x)`` barely turns over one block. A :class:`RuntimeWarning` is
    raised when ``K_c * delta * 2 pi / N`` exceeds ``warn_factor``.

    The band is ``[K_c - B/2, K_c + B/2]`` (``B`` even).
    """
    mag = np.abs(np.asarray(magnitudes, dtype=float))
    n = mag.size
    if delta < 1 or int(delta) != delta:
        raise ValueError("delta must be a positive whole number of samples")
    if b % 2:
        raise ValueError("B must be even so the band is centred on K_c")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    spread = abs(k_c) * delta * 2 * np.pi / n
    if spread > warn_factor:
        warnings.warn(
            f"K_c * delta = {spread:.3g} rad exceeds {warn_factor}; the block-phase "
            "prediction is unreliable", RuntimeWarning, stacklevel=2)
    sig = ComplexSignal(mag.astype(complex))
    labels = block_labels(sig, delta * sig.spacing)
    emp, _ = _mc_partial_sum(mag, k_c - b // 2, k_c + b // 2, trials, seed, labels)
    pred = delta * expected_partial_sum_power(mag, b)
    return emp, pred


def probe_indices(n: int, count: int = 10) -> np.ndarray:
    """``count`` evenly spaced indices in ``[0, n)``."""
    return np.unique(np.linspace(0, n - 1, count).round().astype(np.int64))


def write_power_csv(path, empirical, analytic) -> None:
    """Write ``index,empirical,analytic`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "empirical", "analytic"])
        for i, (e, a) in enumerate(zip(empirical, analytic)):
            w.writerow([i, repr(float(e)), repr(float(a))])

