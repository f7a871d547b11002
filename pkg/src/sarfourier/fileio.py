"""On-disk formats: raw complex arrays with JSON sidecars, PGM images, CSV.

A complex array ``foo.c128`` holds little-endian float64 ``(re, im)`` pairs
in row-major order. ``foo.json`` next to it records ``format_version``,
``dtype`` (always ``"c128le"``), ``dims``, ``role`` and whatever metadata
the writer attached (geometry, scene, sample coordinates).
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .forward import PhaseHistory
from .geometry import AcquisitionGeometry, SceneSpec
from .scene import ComplexImage

__all__ = [
    "FORMAT_VERSION",
    "DB_FLOOR",
    "sidecar_path",
    "write_complex",
    "read_complex",
    "save_phase_history",
    "load_phase_history",
    "save_image",
    "load_image",
    "save_coefficients",
    "load_coefficients",
    "to_display",
    "write_pgm",
    "read_pgm",
    "write_csv",
]

FORMAT_VERSION = 1
DTYPE_TAG = "c128le"
DB_FLOOR = -60.0
_LE = np.dtype("<c16")


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def write_complex(path, array, role: str, meta: dict | None = None) -> None:
    """Write ``array`` and its sidecar. Existing files are replaced."""
    arr = np.ascontiguousarray(array, dtype=_LE)
    head = {"format_version": FORMAT_VERSION, "dtype": DTYPE_TAG,
            "dims": list(arr.shape), "role": role}
    head.update(meta or {})
    Path(path).write_bytes(arr.tobytes(order="C"))
    sidecar_path(path).write_text(json.dumps(head, indent=2, sort_keys=True) + "\n")


def read_complex(path, role: str | None = None):
    """Return ``(array, sidecar dict)``; checks the dtype tag, size and optionally the role."""
    side = sidecar_path(path)
    if not side.exists():
        raise FileNotFoundError(f"missing sidecar {side}")
    head = json.loads(side.read_text())
    if head.get("dtype") != DTYPE_TAG:
        raise ValueError(f"{side}: unsupported dtype {head.get('dtype')!r}")
    if head.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"{side}: unsupported format version {head.get('format_version')}")
    if role is not None and head.get("role") != role:
        raise ValueError(f"{path}: expected a {role} file, found {head.get('role')!r}")
    raw = Path(path).read_bytes()
    dims = tuple(head["dims"])
    if len(raw) != 16 * int(np.prod(dims)):
        raise ValueError(f"{path}: {len(raw)} bytes does not match dims {dims}")
    arr = np.frombuffer(raw, dtype=_LE).reshape(dims).astype(complex)
    return arr, head


def save_phase_history(path, ph: PhaseHistory) -> None:
    meta = {"k_radpm": ph.k_radpm.tolist(), "azimuths_rad": ph.azimuths_rad.tolist(),
            "scene": ph.scene.to_dict()}
    if ph.geometry is not None:
        meta["geometry"] = ph.geometry.to_dict()
    write_complex(path, ph.samples, "phase_history", meta)


def load_phase_history(path) -> PhaseHistory:
    arr, head = read_complex(path, "phase_history")
    geom = AcquisitionGeometry.from_dict(head["geometry"]) if "geometry" in head else None
    return PhaseHistory(arr, np.array(head["k_radpm"]), np.array(head["azimuths_rad"]),
                        SceneSpec.from_dict(head["scene"]), geom)


def save_image(path, img: ComplexImage, extra: dict | None = None) -> None:
    meta = {"scene": img.scene.to_dict()}
    meta.update(extra or {})
    write_complex(path, img.samples, "image", meta)


def load_image(path) -> ComplexImage:
    arr, head = read_complex(path, "image")
    return ComplexImage(arr, SceneSpec.from_dict(head["scene"]).pixel_m)


def save_coefficients(path, coeffs: dict, start: float, length: float) -> None:
    """1D Fourier-series coefficients ``{k: c_k}`` of a signal on ``[start, start + length)``."""
    ks = sorted(int(k) for k in coeffs)
    write_complex(path, np.array([coeffs[k] for k in ks], dtype=complex), "coefficients",
                  {"ks": ks, "start": float(start), "length": float(length)})


def load_coefficients(path):
    """Return ``(coeffs, start, length)``."""
    arr, head = read_complex(path, "coefficients")
    return dict(zip(head["ks"], arr.tolist())), head["start"], head["length"]


def to_display(values, db: bool = False, floor_db: float = DB_FLOOR) -> np.ndarray:
    """Map magnitudes to ``[0, 1]``: linear ``|v| / max`` or dB clamped at ``floor_db``."""
    mag = np.abs(np.asarray(values))
    peak = mag.max() if mag.size else 0.0
    if peak == 0:
        return np.zeros(mag.shape)
    rel = mag / peak
    if not db:
        return rel
    if not floor_db < 0:
        raise ValueError("dB floor must be negative")
    with np.errstate(divide="ignore"):
        level = 20.0 * np.log10(rel)
    return np.clip((np.maximum(level, floor_db) - floor_db) / -floor_db, 0.0, 1.0)


def write_pgm(path, values, db: bool = False, floor_db: float = DB_FLOOR) -> None:
    """16-bit binary PGM (P5) of ``|values|``; array rows become image rows."""
    img = np.atleast_2d(to_display(values, db, floor_db))
    pix = np.round(img * 65535).astype(">u2")
    h, w = pix.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n65535\n".encode("ascii") + pix.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a 16-bit P5 file written by :func:`write_pgm`."""
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5" or parts[2] != b"65535":
        raise ValueError(f"{path}: not a 16-bit P5 file")
    w, h = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=">u2").reshape(h, w).astype(np.uint16)


def write_csv(path, header, rows) -> None:
    """Write a CSV with a mandatory header row; floats use round-trip repr."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                        for v in row])
