"""Image formation from phase-history data and 1D partial Fourier sums."""
from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from ._backend import core
from .forward import PhaseHistory, nudft_adjoint
from .geometry import SceneSpec
from .kernels import KernelField, window_weights
from .scene import ComplexImage

__all__ = [
    "partial_sum_1d",
    "dft_coefficients",
    "matched_filter",
    "backprojection",
    "GriddingConfig",
    "grid_and_fft",
    "apply_window",
    "convolve_with_kernel",
]


def dft_coefficients(samples, k1: int, k2: int) -> dict:
    """DFT coefficients ``sum_j f_j exp(-2 pi i j k / N)`` for ``k = k1..k2``.

    Negative ``k`` are read from the periodic DFT, so the band may straddle 0.
    """
    samples = np.asarray(samples)
    fhat = np.fft.fft(samples)
    n = samples.size
    return {k: fhat[k % n] for k in range(int(k1), int(k2) + 1)}


def partial_sum_1d(coeffs, k1: int, k2: int, x, weights=None, normalize=None):
    """Evaluate ``sum_{k=k1..k2} w_k c_k exp(i k x)`` on the points ``x``.

    Parameters
    ----------
    coeffs : mapping or callable
        ``k -> c_k``. Every ``k`` in the band must be present.
    x : array_like
        Evaluation points (radians; the series is ``2 pi``-periodic).
    weights : array_like, optional
        One taper weight per ``k`` in the band (see
        :func:`~sarfourier.kernels.window_weights`).
    normalize : float, optional
        Divide by this factor. Pass ``N`` together with ``x = 2 pi m / N``
        for the discrete (inverse-DFT) convention.
    """
    k1, k2 = int(k1), int(k2)
    if k1 > k2:
        raise ValueError("need k1 <= k2")
    ks = np.arange(k1, k2 + 1)
    if callable(coeffs) and not isinstance(coeffs, Mapping):
        c = np.array([coeffs(int(k)) for k in ks], dtype=complex)
    else:
        missing = [int(k) for k in ks if int(k) not in coeffs]
        if missing:
            raise KeyError(f"missing coefficients for k = {missing}")
        c = np.array([coeffs[int(k)] for k in ks], dtype=complex)
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        if w.size != ks.size:
            raise ValueError("need one weight per coefficient")
        c = c * w
    x = np.asarray(x, dtype=float)
    out = np.exp(1j * np.multiply.outer(x, ks)) @ c
    if normalize is not None:
        out = out / normalize
    return out


def _scene_of(ph: PhaseHistory, scene: SceneSpec | None) -> SceneSpec:
    return ph.scene if scene is None else scene


def _digital(ph: PhaseHistory, scene: SceneSpec):
    kh = ph.k_radpm * scene.pixel_m
    k1 = np.outer(np.cos(ph.azimuths_rad), kh).ravel()
    k2 = np.outer(np.sin(ph.azimuths_rad), kh).ravel()
    return k1, k2


def matched_filter(ph: PhaseHistory, scene: SceneSpec | None = None) -> ComplexImage:
    """Direct matched-filter image ``sum_theta sum_j d(k_j, theta) exp(i k_j xi_theta . x)``.

    This is the ``O(M P N^2)`` reference that the fast paths approximate.
    """
    scene = _scene_of(ph, scene)
    k1, k2 = _digital(ph, scene)
    img = nudft_adjoint(ph.flat(), k1, k2, scene.n_pixels)
    return ComplexImage(img, scene.pixel_m)


def backprojection(ph: PhaseHistory, scene: SceneSpec | None = None,
                   upsample: int = 8) -> ComplexImage:
    """Approximate the matched filter by backprojecting range profiles.

    Each pulse is turned into a range profile by a zero-padded inverse FFT of
    length ``upsample * M``. The profile is demodulated to baseband before
    it is tabulated, so linear interpolation only has to follow the envelope;
    the carrier ``exp(i k_1 u)`` is put back exactly per pixel.
    """
    if upsample < 1:
        raise ValueError("upsample must be >= 1")
    scene = _scene_of(ph, scene)
    m = ph.n_freqs
    if m < 2:
        raise ValueError("backprojection needs at least two frequencies")
    dk = np.diff(ph.k_radpm)
    if np.max(np.abs(dk - dk.mean())) > 1e-9 * dk.mean():
        raise ValueError("backprojection needs equally spaced wavenumbers")
    h = scene.pixel_m
    dkappa = float(dk.mean()) * h
    kappa1 = float(ph.k_radpm[0]) * h
    n_fft = int(upsample) * m
    period = 2.0 * math.pi / dkappa
    delta = period / n_fft
    cshift = 0.5 * (m - 1) * dkappa
    # p(u_q) = sum_j d_j exp(i j dkappa u_q) on u_q = q * delta, one column per pulse
    prof = np.fft.ifft(ph.samples, n=n_fft, axis=0) * n_fft
    q = np.arange(n_fft + 1)
    tables = (prof[q % n_fft, :] * np.exp(-1j * cshift * delta * q)[:, None]).T
    th = ph.azimuths_rad
    img = core.backproject_tables(np.ascontiguousarray(tables), np.cos(th), np.sin(th),
                                  period, delta, kappa1, cshift, scene.n_pixels)
    return ComplexImage(img, h)


@dataclass(frozen=True)
class GriddingConfig:
    """Gaussian gridding parameters.

    ``oversampling`` is the ratio of the Cartesian k-grid size to ``N``;
    ``half_width`` the number of grid cells on each side of a sample that
    receive weight.
    """

    oversampling: float = 2.0
    half_width: int = 3

    def __post_init__(self):
        if self.oversampling < 1:
            raise ValueError("oversampling must be >= 1")
        if self.half_width < 1:
            raise ValueError("half_width must be >= 1")

    def grid_size(self, n: int) -> int:
        g = int(math.ceil(self.oversampling * n))
        return g + (g % 2)

    def tau(self, n: int) -> float:
        # Greengard & Lee's width; reduces to a plain Gaussian when oversampling < 1.5
        r = self.grid_size(n) / n
        return math.pi * self.half_width / (n * n * r * max(r - 0.5, 0.5))


def grid_and_fft(ph: PhaseHistory, scene: SceneSpec | None = None,
                 config: GriddingConfig | None = None) -> ComplexImage:
    """Fast matched-filter image: Gaussian gridding then one inverse FFT.

    The samples are shifted by the centre ``K0`` of their bounding box so
    that the occupied band sits around the origin of the k-grid, spread onto
    an oversampled periodic grid, transformed, deapodised by the Gaussian's
    Fourier series, cropped to ``N x N`` and finally remodulated by
    ``exp(i K0 . j)``.
    """
    scene = _scene_of(ph, scene)
    config = config or GriddingConfig()
    n = scene.n_pixels
    k1, k2 = _digital(ph, scene)
    c1 = 0.5 * (k1.min() + k1.max())
    c2 = 0.5 * (k2.min() + k2.max())
    s1 = np.mod(k1 - c1 + math.pi, 2 * math.pi) - math.pi
    s2 = np.mod(k2 - c2 + math.pi, 2 * math.pi) - math.pi
    g = config.grid_size(n)
    tau = config.tau(n)
    grid = core.spread_gaussian(s1, s2, ph.flat(), g, config.half_width, tau)
    full = np.fft.ifft2(grid)
    j = np.arange(-n // 2, n // 2)
    sub = full[np.ix_(j % g, j % g)]
    deapod = math.sqrt(tau / math.pi) * np.exp(-tau * j.astype(float) ** 2)
    img = sub / np.outer(deapod, deapod)
    img *= np.exp(1j * c1 * j)[:, None] * np.exp(1j * c2 * j)[None, :]
    return ComplexImage(img, scene.pixel_m)


def apply_window(ph: PhaseHistory, kind, alpha=None) -> PhaseHistory:
    """Taper the data by ``w_freq(j) * w_az(i)``."""
    kw = {} if alpha is None else {"alpha": alpha}
    wf = window_weights(kind, ph.n_freqs, **kw)
    wa = window_weights(kind, ph.n_azimuths, **kw)
    return ph.with_samples(ph.samples * np.outer(wf, wa))


def convolve_with_kernel(image: ComplexImage, kernel: KernelField) -> ComplexImage:
    """Linear convolution ``f * K`` cropped to the image grid.

    The kernel may be sampled on a larger centred grid than the image; a
    kernel covering ``2N`` pixels supplies every offset the convolution needs.
    """
    if not kernel.is_field:
        raise ValueError("need a 2D kernel field")
    if not math.isclose(kernel.spacing, image.pixel_m, rel_tol=1e-12):
        raise ValueError(
            f"kernel spacing {kernel.spacing} does not match pixel size {image.pixel_m}")
    nk = kernel.n
    full = fftconvolve(image.samples, kernel.values, mode="full")
    c = nk // 2
    return ComplexImage(full[c:c + image.n, c:c + image.n], image.pixel_m)
