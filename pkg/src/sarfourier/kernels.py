"""Closed-form convolution kernels of band-limited Fourier sums.

Every kernel here is a closed form for an exponential sum:

* ``dirichlet(n, x)     = sum_{k=-n..n} exp(i k x)`` (``n`` may be half-integer)
* ``offset_kernel       = sum_{k=K1..K2} exp(i k x)`` with ``Kc, B`` the band
  centre and width
* ``h_kernel            = sum_{j=1..M} exp(i k_j x)``, ``k_j`` equispaced
* ``kernel2d            = sum over azimuths of h_kernel(xi_theta . x)``, the
  point-spread function of the matched filter
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import windows as _windows

from ._backend import core
from .geometry import AcquisitionGeometry, SceneSpec

__all__ = [
    "KernelField",
    "dirichlet",
    "offset_kernel",
    "h_kernel",
    "kernel2d",
    "kernel2d_for",
    "window_weights",
    "WINDOW_KINDS",
]

GAUSSIAN_ALPHA = 2.5
WINDOW_KINDS = ("rectangular", "fejer", "hann", "hamming", "gaussian")


@dataclass
class KernelField:
    """A sampled kernel: a 1D trace or a 2D field on a scene grid.

    For a trace, ``values[i]`` sits at ``origin + i * spacing``. For a field,
    ``values[r, c]`` sits at ``((r - N/2) h, (c - N/2) h)``.
    """

    values: np.ndarray
    spacing: float
    origin: float = 0.0
    params: dict = field(default_factory=dict)

    @property
    def is_field(self) -> bool:
        return self.values.ndim == 2

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def peak(self) -> float:
        return float(np.abs(self.values).max())


def dirichlet(n, x):
    """Dirichlet kernel ``sin((n + 1/2) x) / sin(x / 2)`` for real ``n >= 0``.

    At ``x`` in ``2 pi Z`` the removable singularity is filled with its
    limit ``(2n + 1) cos((n + 1/2) x) / cos(x / 2)``: that is ``2n + 1`` for
    integer ``n`` and ``+-(2n + 1)`` for half-integer ``n``, matching the
    explicit sum in both cases.
    """
    x_arr = np.asarray(x, dtype=float)
    out = core.dirichlet_ratio(2.0 * n + 1.0, x_arr.ravel()).reshape(x_arr.shape)
    return float(out) if out.ndim == 0 else out


def offset_kernel(k_c, b, x):
    """``exp(i Kc x) D_{B/2}(x)``: the kernel of a partial sum over ``[Kc-B/2, Kc+B/2]``."""
    if b < 0:
        raise ValueError("bandwidth must be non-negative")
    x = np.asarray(x, dtype=float)
    out = np.exp(1j * k_c * x) * dirichlet(b / 2.0, x)
    return complex(out) if out.ndim == 0 else out


def h_kernel(k_c, m, delta_k, x):
    """``exp(i Kc x) D_{(M-1)/2}(dk x)`` = ``sum_j exp(i k_j x)`` over ``M`` equispaced ``k_j``."""
    if m < 1 or not delta_k > 0:
        raise ValueError("need M >= 1 and delta_k > 0")
    x = np.asarray(x, dtype=float)
    out = np.exp(1j * k_c * x) * dirichlet((m - 1) / 2.0, delta_k * x)
    return complex(out) if out.ndim == 0 else out


def kernel2d(k_c, m, delta_k, thetas, scene: SceneSpec) -> KernelField:
    """Matched-filter point-spread function sampled on ``scene``.

    ``K(x, y) = sum_theta h_kernel(x cos theta + y sin theta)``. ``k_c`` and
    ``delta_k`` are in rad/m and positions in metres, so the result is
    directly comparable with :func:`sarfourier.imaging.matched_filter`.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    xs = scene.coords
    vals = core.kernel_field(float(k_c), float(m), float(delta_k),
                             np.cos(thetas), np.sin(thetas), xs, xs)
    params = {"k_c": float(k_c), "m": int(m), "delta_k": float(delta_k),
              "thetas": thetas.tolist()}
    return KernelField(vals, scene.pixel_m, -scene.radius_m, params)


def kernel2d_for(geom: AcquisitionGeometry, scene: SceneSpec) -> KernelField:
    """:func:`kernel2d` with parameters taken from an acquisition geometry."""
    return kernel2d(geom.k_center, geom.n_freqs, geom.delta_k, geom.azimuths_rad, scene)


def window_weights(kind, m: int, alpha: float = GAUSSIAN_ALPHA) -> np.ndarray:
    """Symmetric spectral taper of length ``m``.

    ``kind`` is one of :data:`WINDOW_KINDS`. ``fejer`` uses the linear
    weights ``1 - |k| / n`` for ``k = -n..n``, ``n = (m - 1) / 2``, so the
    end weights are 0. ``gaussian`` takes the shape parameter ``alpha``
    (``exp(-(alpha k / n)^2 / 2)``).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if kind not in WINDOW_KINDS:
        raise ValueError(f"unknown window {kind!r}; choose from {WINDOW_KINDS}")
    if kind == "rectangular" or m == 1:
        return np.ones(m)
    half = (m - 1) / 2.0
    k = np.arange(m) - half
    if kind == "fejer":
        return 1.0 - np.abs(k) / half
    if kind == "hann":
        return _windows.hann(m, sym=True)
    if kind == "hamming":
        return _windows.hamming(m, sym=True)
    return _windows.gaussian(m, std=half / alpha, sym=True)
