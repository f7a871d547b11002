"""Fourier-domain analysis of spotlight SAR image formation.

Simulation of polar Fourier data, closed-form point-spread kernels, image
formation (direct matched filter, backprojection, gridding), random-phase
statistics and l1/TV regularized reconstruction.
"""
from ._backend import NAME as backend
from .forward import PhaseHistory, simulate_phase_history
from .geometry import AcquisitionGeometry, SceneSpec, reference_geometry
from .imaging import backprojection, grid_and_fft, matched_filter
from .scene import ComplexImage, ComplexSignal

__all__ = [
    "backend",
    "AcquisitionGeometry",
    "SceneSpec",
    "reference_geometry",
    "ComplexImage",
    "ComplexSignal",
    "PhaseHistory",
    "simulate_phase_history",
    "matched_filter",
    "backprojection",
    "grid_and_fft",
]

__version__ = "0.1.0"
