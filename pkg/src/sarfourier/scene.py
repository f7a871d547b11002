"""Synthetic scenes and 1D test signals."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _rng
from .geometry import SceneSpec

__all__ = [
    "ComplexImage",
    "ComplexSignal",
    "point_scatterers",
    "step_signal",
    "ramp_signal",
    "apply_random_phases",
    "apply_correlated_phases",
    "shepp_logan_magnitude",
]


@dataclass
class ComplexImage:
    """``N x N`` complex samples on a symmetric pixel grid.

    ``samples[r, c]`` holds pixel ``(j1, j2) = (r - N/2, c - N/2)`` located
    at ``(x, y) = (j1 h, j2 h)``; rows run along x.
    """

    samples: np.ndarray
    pixel_m: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] % 2:
            raise ValueError(f"expected an even square image, got shape {s.shape}")
        self.samples = s
        self.pixel_m = float(self.pixel_m)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def scene(self) -> SceneSpec:
        return SceneSpec.from_pixel(self.pixel_m, self.n)

    @classmethod
    def zeros(cls, scene: SceneSpec) -> "ComplexImage":
        n = scene.n_pixels
        return cls(np.zeros((n, n), dtype=complex), scene.pixel_m)

    def at(self, j1: int, j2: int) -> complex:
        """Value at signed pixel index ``(j1, j2)``."""
        h = self.n // 2
        return self.samples[j1 + h, j2 + h]


@dataclass
class ComplexSignal:
    """Samples of a 1D signal on ``start + length * j / n``."""

    samples: np.ndarray
    start: float = -math.pi
    length: float = 2 * math.pi

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex).ravel()
        if s.size < 2:
            raise ValueError("signal needs at least two samples")
        self.samples = s

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        return self.start + self.spacing * np.arange(self.n)


def point_scatterers(scene: SceneSpec, points) -> ComplexImage:
    """Place point targets ``(x_m, y_m, amplitude)`` at their nearest pixels.

    Coincident targets accumulate.
    """
    img = ComplexImage.zeros(scene)
    n, h, half = scene.n_pixels, scene.pixel_m, scene.n_pixels // 2
    for p in points:
        x, y, amp = p
        if not (abs(x) < scene.radius_m and abs(y) < scene.radius_m):
            raise ValueError(f"point ({x}, {y}) lies outside the scene of radius {scene.radius_m}")
        # round-half-up, then clip: x just below R can round onto index N/2
        r = min(int(math.floor(x / h + 0.5)) + half, n - 1)
        c = min(int(math.floor(y / h + 0.5)) + half, n - 1)
        img.samples[r, c] += complex(amp)
    return img


def step_signal(n: int) -> ComplexSignal:
    """0 on ``[-pi, 0)`` and 1 on ``[0, pi)``."""
    if n < 2 or n % 2:
        raise ValueError("n must be an even integer >= 2")
    sig = ComplexSignal(np.zeros(n, dtype=complex))
    sig.samples[sig.x >= 0] = 1.0
    return sig


def ramp_signal(n: int) -> ComplexSignal:
    """Periodic sawtooth on ``[-1/2, 1/2)``: ``2x + 2`` left of 0, ``2x`` right."""
    if n < 2:
        raise ValueError("n must be >= 2")
    x = -0.5 + np.arange(n) / n
    f = np.where(x < 0, 2 * x + 2, 2 * x)
    return ComplexSignal(f, start=-0.5, length=1.0)


def _with_samples(obj, samples):
    if isinstance(obj, ComplexImage):
        return ComplexImage(samples, obj.pixel_m)
    if isinstance(obj, ComplexSignal):
        return ComplexSignal(samples, obj.start, obj.length)
    return samples


def modulus(z):
    """Modulus via ``hypot``; numpy's vectorised complex ``abs`` may be 1 ulp off."""
    z = np.asarray(z)
    return np.hypot(z.real, z.imag)


def _polar(r, phi):
    """``r exp(i phi)`` whose ``modulus`` equals ``r`` exactly.

    The rounded product can miss ``r`` by an ulp; the samples that do are
    moved to the nearest neighbouring representable point with exact modulus.
    """
    r = np.asarray(r, dtype=float)
    z = np.asarray(r * np.exp(1j * np.asarray(phi)), dtype=complex)
    shape = z.shape
    mag = np.broadcast_to(r, shape).ravel()
    re, im = z.real.ravel().copy(), z.imag.ravel().copy()
    bad = np.flatnonzero(np.hypot(re, im) != mag)
    for reach in (1, 2, 3):
        if bad.size == 0:
            break
        sre, sim = np.spacing(re[bad]), np.spacing(im[bad])
        done = np.zeros(bad.size, dtype=bool)
        steps = sorted(range(-reach, reach + 1), key=abs)
        for i in steps:
            for j in steps:
                cr, ci = re[bad] + i * sre, im[bad] + j * sim
                ok = ~done & (np.hypot(cr, ci) == mag[bad])
                re[bad[ok]], im[bad[ok]] = cr[ok], ci[ok]
                done |= ok
        bad = bad[~done]
    return (re + 1j * im).reshape(shape)


def apply_random_phases(obj, seed: int):
    """Replace every phase by an independent draw from ``U[-pi, pi)``.

    Accepts a :class:`ComplexSignal`, a :class:`ComplexImage` or a bare
    array. Element ``i`` (row-major) always receives draw ``i`` of the
    ``seed`` stream.
    """
    s = obj.samples if hasattr(obj, "samples") else np.asarray(obj)
    phases = _rng.uniform_phases(seed, s.size).reshape(s.shape)
    return _with_samples(obj, _polar(modulus(s), phases))


def block_labels(signal: ComplexSignal, delta: float) -> np.ndarray:
    """Index of the width-``delta`` block holding each sample."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    # the 1e-9 guards j*h/delta landing a hair below an integer
    return np.floor(np.arange(signal.n) * (signal.spacing / delta) + 1e-9).astype(np.int64)


def apply_correlated_phases(signal: ComplexSignal, delta: float, seed: int,
                            stream: int = 0) -> ComplexSignal:
    """Random phases that are constant on consecutive blocks of width ``delta``.

    Samples in the same block share one uniform phase; different blocks are
    independent. ``delta`` of one sample spacing reproduces
    :func:`apply_random_phases`; ``delta`` at least the domain length gives a
    single global phase.
    """
    labels = block_labels(signal, delta)
    phases = _rng.uniform_phases(seed, int(labels[-1]) + 1, stream)[labels]
    return ComplexSignal(_polar(modulus(signal.samples), phases),
                         signal.start, signal.length)


# Modified Shepp-Logan (Toft): intensity, semi-axes a, b, centre x0, y0, angle (deg).
_SHEPP_LOGAN = (
    (1.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0),
    (-0.80, 0.6624, 0.8740, 0.00, -0.0184, 0.0),
    (-0.20, 0.1100, 0.3100, 0.22, 0.0000, -18.0),
    (-0.20, 0.1600, 0.4100, -0.22, 0.0000, 18.0),
    (0.10, 0.2100, 0.2500, 0.00, 0.3500, 0.0),
    (0.10, 0.0460, 0.0460, 0.00, 0.1000, 0.0),
    (0.10, 0.0460, 0.0460, 0.00, -0.1000, 0.0),
    (0.10, 0.0460, 0.0230, -0.08, -0.6050, 0.0),
    (0.10, 0.0230, 0.0230, 0.00, -0.6060, 0.0),
    (0.10, 0.0230, 0.0460, 0.06, -0.6050, 0.0),
)


def shepp_logan_magnitude(n: int, pixel_m: float = 1.0) -> ComplexImage:
    """Real-valued modified Shepp-Logan phantom with values in ``[0, 1]``."""
    if n < 64 or n % 2:
        raise ValueError("n must be an even integer >= 64")
    t = np.arange(-n // 2, n // 2) / (n / 2)
    x, y = np.meshgrid(t, t, indexing="ij")
    img = np.zeros((n, n))
    for amp, a, b, x0, y0, deg in _SHEPP_LOGAN:
        th = math.radians(deg)
        c, s = math.cos(th), math.sin(th)
        xr = (x - x0) * c + (y - y0) * s
        yr = -(x - x0) * s + (y - y0) * c
        img[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += amp
    return ComplexImage(np.clip(img, 0.0, 1.0), pixel_m)
