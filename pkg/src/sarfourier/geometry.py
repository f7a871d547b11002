"""Acquisition geometry and Fourier-sampling coordinates.

Angles are radians everywhere in the library; only the JSON/CLI layer
speaks degrees.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SPEED_OF_LIGHT = 2.998e8

__all__ = [
    "SPEED_OF_LIGHT",
    "AcquisitionGeometry",
    "SceneSpec",
    "wavenumber",
    "digital_frequencies",
    "max_scene_radius",
    "max_crossrange_radius",
    "reference_geometry",
    "check_scene_limits",
]


def _check_elevation(phi_rad):
    if not (0.0 <= phi_rad < math.pi / 2):
        raise ValueError(
            f"elevation must satisfy 0 <= phi < pi/2 (got {phi_rad!r} rad); "
            "cos(phi) <= 0 has no ground-plane projection"
        )


@dataclass(frozen=True)
class AcquisitionGeometry:
    """Microwave frequencies, a fixed elevation and a list of azimuths.

    Parameters
    ----------
    freqs_hz : array_like
        Equally spaced, strictly increasing transmit frequencies (Hz).
    elevation_rad : float
        Elevation angle, ``0 <= phi < pi/2``.
    azimuths_rad : array_like
        Strictly increasing azimuth angles (rad) spanning less than a turn.
    c_mps : float
        Propagation speed.
    """

    freqs_hz: np.ndarray
    elevation_rad: float
    azimuths_rad: np.ndarray
    c_mps: float = SPEED_OF_LIGHT

    def __post_init__(self):
        freqs = np.asarray(self.freqs_hz, dtype=float).ravel()
        az = np.asarray(self.azimuths_rad, dtype=float).ravel()
        if freqs.size < 2:
            raise ValueError("need at least two frequencies")
        steps = np.diff(freqs)
        if np.any(steps <= 0):
            raise ValueError("frequencies must be strictly increasing")
        if np.max(np.abs(steps - steps.mean())) > 1e-9 * steps.mean():
            raise ValueError("frequencies must be equally spaced (rel. tol 1e-9)")
        if az.size == 0:
            raise ValueError("need at least one azimuth")
        if az.size > 1 and (np.any(np.diff(az) <= 0) or az[-1] - az[0] >= 2 * math.pi):
            raise ValueError("azimuths must be strictly increasing within one revolution")
        _check_elevation(float(self.elevation_rad))
        if self.c_mps <= 0:
            raise ValueError("c_mps must be positive")
        freqs.setflags(write=False)
        az.setflags(write=False)
        object.__setattr__(self, "freqs_hz", freqs)
        object.__setattr__(self, "azimuths_rad", az)
        object.__setattr__(self, "elevation_rad", float(self.elevation_rad))
        object.__setattr__(self, "c_mps", float(self.c_mps))

    @property
    def n_freqs(self) -> int:
        return self.freqs_hz.size

    @property
    def n_azimuths(self) -> int:
        return self.azimuths_rad.size

    @property
    def delta_alpha(self) -> float:
        return float((self.freqs_hz[-1] - self.freqs_hz[0]) / (self.n_freqs - 1))

    @property
    def delta_theta(self) -> float:
        if self.n_azimuths < 2:
            return 0.0
        return float((self.azimuths_rad[-1] - self.azimuths_rad[0]) / (self.n_azimuths - 1))

    @property
    def k_radpm(self) -> np.ndarray:
        """Wavenumbers of every frequency sample (rad/m)."""
        return wavenumber(self.freqs_hz, self.elevation_rad, self.c_mps)

    @property
    def k_center(self) -> float:
        k = self.k_radpm
        return float(0.5 * (k[0] + k[-1]))

    @property
    def delta_k(self) -> float:
        k = self.k_radpm
        return float((k[-1] - k[0]) / (k.size - 1))

    def to_dict(self) -> dict:
        return {
            "freqs_hz": [float(a) for a in self.freqs_hz],
            "elevation_deg": math.degrees(self.elevation_rad),
            "azimuths_deg": [math.degrees(t) for t in self.azimuths_rad],
            "c_mps": self.c_mps,
            # exact copies; degrees alone do not round-trip bit for bit
            "elevation_rad": self.elevation_rad,
            "azimuths_rad": [float(t) for t in self.azimuths_rad],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AcquisitionGeometry":
        """Build from a dict; radian keys win over degree keys when both are present."""
        if "elevation_rad" in d:
            phi = float(d["elevation_rad"])
        else:
            phi = math.radians(d["elevation_deg"])
        if "azimuths_rad" in d:
            az = np.asarray(d["azimuths_rad"], dtype=float)
        else:
            az = np.radians(np.asarray(d["azimuths_deg"], dtype=float))
        return cls(
            freqs_hz=np.asarray(d["freqs_hz"], dtype=float),
            elevation_rad=phi,
            azimuths_rad=az,
            c_mps=d.get("c_mps", SPEED_OF_LIGHT),
        )

    @classmethod
    def load(cls, path) -> "AcquisitionGeometry":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def uniform(cls, center_hz, bandwidth_hz, n_freqs, elevation_rad,
                center_az_rad, span_rad, n_az, c_mps=SPEED_OF_LIGHT):
        """Equispaced frequencies and azimuths centred on the given values."""
        freqs = center_hz + bandwidth_hz * (np.arange(n_freqs) / (n_freqs - 1) - 0.5)
        if n_az == 1:
            az = np.array([center_az_rad])
        else:
            az = center_az_rad + span_rad * (np.arange(n_az) / (n_az - 1) - 0.5)
        return cls(freqs, elevation_rad, az, c_mps)


@dataclass(frozen=True)
class SceneSpec:
    """Square scene of half-width ``radius_m`` on an ``n_pixels`` grid.

    The pixel size is derived, never set: ``pixel_m = 2 R / N``.
    """

    radius_m: float
    n_pixels: int
    pixel_m: float = field(init=False)

    def __post_init__(self):
        if not self.radius_m > 0:
            raise ValueError("radius_m must be positive")
        n = int(self.n_pixels)
        if n != self.n_pixels or n <= 0 or n % 2:
            raise ValueError("n_pixels must be an even positive integer")
        object.__setattr__(self, "radius_m", float(self.radius_m))
        object.__setattr__(self, "n_pixels", n)
        object.__setattr__(self, "pixel_m", 2.0 * self.radius_m / n)

    @classmethod
    def from_pixel(cls, pixel_m: float, n_pixels: int) -> "SceneSpec":
        return cls(0.5 * pixel_m * n_pixels, n_pixels)

    @property
    def indices(self) -> np.ndarray:
        """Signed pixel indices ``-N/2 .. N/2-1``."""
        n = self.n_pixels
        return np.arange(-n // 2, n // 2)

    @property
    def coords(self) -> np.ndarray:
        return self.indices * self.pixel_m

    def to_dict(self) -> dict:
        return {"radius_m": self.radius_m, "n_pixels": self.n_pixels}

    @classmethod
    def from_dict(cls, d: dict) -> "SceneSpec":
        return cls(d["radius_m"], d["n_pixels"])


def wavenumber(alpha_hz, phi_rad, c_mps=SPEED_OF_LIGHT):
    """Ground-plane wavenumber ``2 pi cos(phi) 2 alpha / c`` in rad/m."""
    _check_elevation(float(phi_rad))
    alpha = np.asarray(alpha_hz, dtype=float)
    if np.any(alpha <= 0):
        raise ValueError("frequencies must be positive")
    k = 2.0 * math.pi * math.cos(phi_rad) * 2.0 * alpha / c_mps
    return float(k) if k.ndim == 0 else k


def digital_frequencies(geom: AcquisitionGeometry, scene: SceneSpec) -> np.ndarray:
    """Dimensionless frequencies ``h k(alpha_j) (cos theta_i, sin theta_i)``.

    Returns an ``(M*P, 2)`` array; all frequencies of the first azimuth come
    first, then the second azimuth, and so on.
    """
    kh = geom.k_radpm * scene.pixel_m
    th = geom.azimuths_rad
    k1 = np.outer(np.cos(th), kh).ravel()
    k2 = np.outer(np.sin(th), kh).ravel()
    return np.column_stack([k1, k2])


def max_scene_radius(delta_alpha_hz, phi_rad, c_mps=SPEED_OF_LIGHT) -> float:
    """Alias-free scene radius in range, ``c / (4 dalpha cos phi)``."""
    _check_elevation(float(phi_rad))
    if not delta_alpha_hz > 0:
        raise ValueError("delta_alpha_hz must be positive")
    return c_mps / (4.0 * delta_alpha_hz * math.cos(phi_rad))


def max_crossrange_radius(alpha_max_hz, phi_rad, delta_theta_rad,
                          c_mps=SPEED_OF_LIGHT) -> float:
    """Alias-free cross-range radius ``c / (4 alpha_max cos phi dtheta)``.

    Uses ``sin(dtheta) ~ dtheta``; a warning is raised above 0.1 rad where
    that stops being a good approximation.
    """
    _check_elevation(float(phi_rad))
    if not (alpha_max_hz > 0 and delta_theta_rad > 0):
        raise ValueError("alpha_max_hz and delta_theta_rad must be positive")
    if delta_theta_rad > 0.1:
        warnings.warn("azimuth step above 0.1 rad: small-angle approximation is poor",
                      stacklevel=2)
    return c_mps / (4.0 * alpha_max_hz * math.cos(phi_rad) * delta_theta_rad)


def check_scene_limits(geom: AcquisitionGeometry, scene: SceneSpec) -> dict:
    """Alias-free limits for ``geom``; warns if ``scene`` exceeds either."""
    limits = {"range_radius_m": max_scene_radius(geom.delta_alpha, geom.elevation_rad, geom.c_mps)}
    if geom.n_azimuths > 1:
        limits["crossrange_radius_m"] = max_crossrange_radius(
            geom.freqs_hz[-1], geom.elevation_rad, geom.delta_theta, geom.c_mps)
    for name, lim in limits.items():
        if scene.radius_m > lim:
            warnings.warn(
                f"scene radius {scene.radius_m:g} m exceeds alias-free {name} {lim:.4g} m",
                stacklevel=2)
    return limits


def reference_geometry(n_freqs=512, n_az=128, c_mps=SPEED_OF_LIGHT):
    """The X-band demo collection used throughout the tests.

    10 GHz centre, 600 MHz bandwidth, 30 degree elevation, ``n_az`` pulses over
    3 degrees of azimuth centred on 50 degrees.
    """
    return AcquisitionGeometry.uniform(
        10e9, 600e6, n_freqs, math.radians(30.0),
        math.radians(50.0), math.radians(3.0), n_az, c_mps)
