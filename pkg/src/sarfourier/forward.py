"""Forward model: phase histories, range projections, aliasing and noise."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _rng
from ._backend import core
from .geometry import AcquisitionGeometry, SceneSpec
from .scene import ComplexImage

__all__ = [
    "PhaseHistory",
    "RangeProfile",
    "nudft_forward",
    "nudft_adjoint",
    "simulate_phase_history",
    "project",
    "backproject_adjoint",
    "aliased_coefficients",
    "add_noise",
    "analytic_ramp_coefficients",
    "RAMP_MEAN",
]

# Mean of the ramp phantom, i.e. its k = 0 Fourier coefficient.
RAMP_MEAN = 1.0

_CHUNK = 4096


@dataclass
class PhaseHistory:
    """Polar Fourier samples of a scene.

    ``samples[j, i]`` is the sample at wavenumber ``k_radpm[j]`` and azimuth
    ``azimuths_rad[i]``. Flattening in Fortran order gives the
    frequency-major layout (all frequencies of the first azimuth first).
    """

    samples: np.ndarray
    k_radpm: np.ndarray
    azimuths_rad: np.ndarray
    scene: SceneSpec
    geometry: AcquisitionGeometry | None = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        self.k_radpm = np.asarray(self.k_radpm, dtype=float).ravel()
        self.azimuths_rad = np.asarray(self.azimuths_rad, dtype=float).ravel()
        m, p = self.k_radpm.size, self.azimuths_rad.size
        if self.samples.shape != (m, p):
            raise ValueError(f"samples shape {self.samples.shape} != ({m}, {p})")
        if m > 1 and np.any(np.diff(self.k_radpm) <= 0):
            raise ValueError("k_radpm must be strictly increasing")

    @property
    def n_freqs(self) -> int:
        return self.k_radpm.size

    @property
    def n_azimuths(self) -> int:
        return self.azimuths_rad.size

    def digital_coords(self):
        """Dimensionless ``(k1, k2)`` of every sample, frequency-major."""
        kh = self.k_radpm * self.scene.pixel_m
        k1 = np.outer(np.cos(self.azimuths_rad), kh).ravel()
        k2 = np.outer(np.sin(self.azimuths_rad), kh).ravel()
        return k1, k2

    def flat(self) -> np.ndarray:
        return self.samples.ravel(order="F")

    def with_samples(self, samples) -> "PhaseHistory":
        return replace(self, samples=np.asarray(samples, dtype=complex))


@dataclass
class RangeProfile:
    """Projection of a scene onto the line of direction ``theta``.

    ``values[m]`` is the line integral at ``w = (m - N/2) h``.
    """

    values: np.ndarray
    theta_rad: float
    pixel_m: float

    @property
    def w(self) -> np.ndarray:
        n = self.values.size
        return np.arange(-n // 2, n // 2) * self.pixel_m


def nudft_forward(f, k1, k2) -> np.ndarray:
    """``sum_{j1,j2} f[j1,j2] exp(-i (k1 j1 + k2 j2))`` for every sample.

    Direct evaluation, ``O(S N^2)``; the sum is separable so each chunk of
    samples costs one matrix product.
    """
    f = np.asarray(f, dtype=complex)
    n = f.shape[0]
    j = np.arange(-n // 2, n // 2)
    k1 = np.asarray(k1, dtype=float).ravel()
    k2 = np.asarray(k2, dtype=float).ravel()
    out = np.empty(k1.size, dtype=complex)
    for s in range(0, k1.size, _CHUNK):
        sl = slice(s, s + _CHUNK)
        e1 = np.exp(-1j * np.outer(k1[sl], j))
        e2 = np.exp(-1j * np.outer(k2[sl], j))
        out[sl] = np.einsum("sb,sb->s", e1 @ f, e2)
    return out


def nudft_adjoint(data, k1, k2, n: int) -> np.ndarray:
    """``sum_s data[s] exp(i (k1_s j1 + k2_s j2))`` on the ``n x n`` grid."""
    data = np.asarray(data, dtype=complex).ravel()
    k1 = np.asarray(k1, dtype=float).ravel()
    k2 = np.asarray(k2, dtype=float).ravel()
    j = np.arange(-n // 2, n // 2)
    out = np.zeros((n, n), dtype=complex)
    for s in range(0, data.size, _CHUNK):
        sl = slice(s, s + _CHUNK)
        e1 = np.exp(1j * np.outer(k1[sl], j)) * data[sl, None]
        e2 = np.exp(1j * np.outer(k2[sl], j))
        out += e1.T @ e2
    return out


def simulate_phase_history(image: ComplexImage, geom: AcquisitionGeometry,
                           scene: SceneSpec | None = None) -> PhaseHistory:
    """Polar Fourier samples of ``image`` by direct summation.

    Parameters
    ----------
    image : ComplexImage
        Scene reflectivity; its pixel size fixes the digital frequencies.
    geom : AcquisitionGeometry
    scene : SceneSpec, optional
        If given, must agree with the image grid.
    """
    if scene is None:
        scene = image.scene
    elif scene.n_pixels != image.n or not math.isclose(scene.pixel_m, image.pixel_m):
        raise ValueError(
            f"image grid (N={image.n}, h={image.pixel_m}) does not match scene "
            f"(N={scene.n_pixels}, h={scene.pixel_m})")
    ph = PhaseHistory(np.zeros((geom.n_freqs, geom.n_azimuths), dtype=complex),
                      geom.k_radpm, geom.azimuths_rad, scene, geom)
    k1, k2 = ph.digital_coords()
    flat = nudft_forward(image.samples, k1, k2)
    ph.samples = flat.reshape(geom.n_azimuths, geom.n_freqs).T.copy()
    return ph


def project(image: ComplexImage, theta_rad: float) -> RangeProfile:
    """Line integrals of ``image`` perpendicular to ``(cos theta, sin theta)``.

    Pixel-driven: each pixel's value times ``h`` is split between the two
    profile bins bracketing ``xi . x``. Mass landing outside ``[-R, R)`` is
    dropped. This discretisation is the exact adjoint of
    :func:`backproject_adjoint` under the ``h``- and ``h**2``-weighted inner
    products.
    """
    c, s = math.cos(theta_rad), math.sin(theta_rad)
    vals = core.splat_project(image.samples, c, s) * image.pixel_m
    return RangeProfile(vals, float(theta_rad), image.pixel_m)


def backproject_adjoint(profile: RangeProfile, scene: SceneSpec) -> ComplexImage:
    """Smear ``profile`` across the scene: pixel value ``g(xi . x)``."""
    if profile.values.size != scene.n_pixels:
        raise ValueError("profile length must equal the scene size")
    c, s = math.cos(profile.theta_rad), math.sin(profile.theta_rad)
    return ComplexImage(core.interp_backproject(profile.values, c, s), scene.pixel_m)


def aliased_coefficients(coeffs: dict, n: int) -> np.ndarray:
    """Fold coefficients ``{k: c}`` into their residue classes mod ``n``.

    ``out[r] = sum_{k = r mod n} c_k``: the coefficients that a uniform
    ``n``-point grid actually sees.
    """
    out = np.zeros(n, dtype=complex)
    for k, c in coeffs.items():
        out[int(k) % n] += c
    return out


def add_noise(ph: PhaseHistory, sigma: float, seed: int) -> PhaseHistory:
    """Add i.i.d. ``N(0, sigma^2) + i N(0, sigma^2)`` to every sample."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return ph.with_samples(ph.samples.copy())
    z = _rng.generator(seed).normal(scale=sigma, size=(2,) + ph.samples.shape)
    return ph.with_samples(ph.samples + z[0] + 1j * z[1])


def analytic_ramp_coefficients(k):
    """Fourier coefficients ``i / (pi k)`` of the ramp phantom (``k != 0``).

    The ``k = 0`` coefficient is :data:`RAMP_MEAN`.
    """
    k_arr = np.asarray(k)
    if np.any(k_arr == 0):
        raise ValueError("k = 0 has no i/(pi k) form; use RAMP_MEAN")
    out = np.asarray(1j / (np.pi * k_arr))
    return complex(out) if out.ndim == 0 else out
