"""The compiled core and the numpy fallback must agree."""
import math
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sarfourier import _backend, _pycore

_core = pytest.importorskip("sarfourier._core")

seeds = st.integers(0, 2**32 - 1)


def cplx(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def close(a, b, tol=1e-10):
    scale = max(np.max(np.abs(b)), 1.0)
    assert np.max(np.abs(np.asarray(a) - np.asarray(b))) <= tol * scale


def test_backend_selection():
    if os.environ.get("SARFOURIER_PURE_PYTHON"):
        assert _backend.NAME == "python" and _backend.core is _pycore
    else:
        assert _backend.NAME == "cython" and _backend.core is _core


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([0, 1, 2, 7, 50, 51, 3.5, 0.5]), seeds)
def test_dirichlet_ratio(m, seed):
    rng = np.random.default_rng(seed)
    y = np.concatenate([rng.uniform(-50, 50, 64), 2 * np.pi * np.arange(-4, 5),
                        2 * np.pi * 3 + np.array([-1e-10, 1e-10])])
    close(_core.dirichlet_ratio(m, y), _pycore.dirichlet_ratio(m, y), 1e-9)


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 6), st.integers(1, 12))
def test_kernel_field(seed, p, n):
    rng = np.random.default_rng(seed)
    th = rng.uniform(0, 2 * np.pi, p)
    xs, ys = rng.uniform(-3, 3, n), rng.uniform(-3, 3, n + 1)
    args = (rng.uniform(50, 400), float(rng.integers(1, 64)), rng.uniform(0.1, 3),
            np.cos(th), np.sin(th), xs, ys)
    close(_core.kernel_field(*args), _pycore.kernel_field(*args), 1e-9)


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 50), st.sampled_from([8, 16, 30]), st.integers(1, 4))
def test_spread_gaussian(seed, count, n_grid, half_width):
    rng = np.random.default_rng(seed)
    kx, ky = rng.uniform(-20, 20, count), rng.uniform(-20, 20, count)
    vals = cplx(rng, count)
    tau = rng.uniform(0.01, 0.2)
    args = (kx, ky, vals, n_grid, half_width, tau)
    close(_core.spread_gaussian(*args), _pycore.spread_gaussian(*args), 1e-12)


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 5), st.sampled_from([4, 10, 16]))
def test_backproject_tables(seed, p, n):
    rng = np.random.default_rng(seed)
    nodes = 33
    period = rng.uniform(5, 40)
    tables = cplx(rng, p, nodes)
    th = rng.uniform(-np.pi, np.pi, p)
    args = (tables, np.cos(th), np.sin(th), period, period / (nodes - 1),
            rng.uniform(-3, 3), rng.uniform(-1, 1), n)
    close(_core.backproject_tables(*args), _pycore.backproject_tables(*args), 1e-10)


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from([2, 8, 16, 32]), st.floats(-math.pi, math.pi))
def test_projection_pair(seed, n, theta):
    rng = np.random.default_rng(seed)
    c, s = math.cos(theta), math.sin(theta)
    img = cplx(rng, n, n)
    close(_core.splat_project(img, c, s), _pycore.splat_project(img, c, s), 1e-12)
    prof = cplx(rng, n)
    close(_core.interp_backproject(prof, c, s), _pycore.interp_backproject(prof, c, s), 1e-12)


@pytest.mark.parametrize("name", ["spread_gaussian", "backproject_tables", "kernel_field"])
def test_thread_count_does_not_change_results(name, rng):
    th = rng.uniform(0, 1, 4)
    args = {
        "spread_gaussian": (rng.uniform(-9, 9, 300), rng.uniform(-9, 9, 300), cplx(rng, 300),
                            32, 3, 0.05),
        "backproject_tables": (cplx(rng, 4, 65), np.cos(th), np.sin(th), 30.0, 30.0 / 64,
                               1.3, 0.2, 24),
        "kernel_field": (300.0, 20.0, 0.5, np.cos(th), np.sin(th), np.linspace(-2, 2, 24),
                         np.linspace(-2, 2, 24)),
    }[name]
    fn = getattr(_core, name)
    try:
        _core.set_num_threads(1)
        one = fn(*args)
        _core.set_num_threads(4)
        four = fn(*args)
    finally:
        _core.set_num_threads(1)
    np.testing.assert_array_equal(one, four)
