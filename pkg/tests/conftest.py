import sys

import numpy as np
import pytest

from sarfourier import _pycore, forward, imaging, kernels

try:
    from sarfourier import _core
except ImportError:
    _core = None

BACKENDS = [pytest.param(_pycore, id="python")]
if _core is not None:
    BACKENDS.append(pytest.param(_core, id="cython"))


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per inner-loop implementation."""
    for mod in (forward, imaging, kernels):
        monkeypatch.setattr(mod, "core", request.param)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def three_scatterer_data(n=128, n_freqs=512, n_az=128):
    """Three-point scene on a 1 cm grid with the reference collection geometry."""
    from sarfourier.forward import simulate_phase_history
    from sarfourier.geometry import SceneSpec, reference_geometry
    from sarfourier.scene import point_scatterers

    scene = SceneSpec.from_pixel(0.01, n)
    s = n / 128
    pts = [(0.0, 0.0, 1.0), (0.4 * s, -0.3 * s, 0.8), (-0.5 * s, 0.6 * s, 0.6j)]
    return simulate_phase_history(point_scatterers(scene, pts), reference_geometry(n_freqs, n_az))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
