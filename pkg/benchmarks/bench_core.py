"""Time the compiled inner loops against their numpy fallbacks.

    python3 benchmarks/bench_core.py [--quick] [--threads N]

Each row checks that both implementations agree before reporting timings.
"""
import argparse
import math
import timeit

import numpy as np

from sarfourier import _pycore

try:
    from sarfourier import _core
except ImportError:  # extension not built
    _core = None


def cases(quick):
    rng = np.random.default_rng(0)
    n = 64 if quick else 128
    na = 16 if quick else 64
    th = np.radians(50 + np.linspace(-1.5, 1.5, na))
    xs = (np.arange(n) - n // 2) * 0.02

    y = rng.uniform(-20, 20, 200_000)
    yield "dirichlet_ratio", (101.0, y)

    yield "kernel_field", (362.0, 128.0, 0.01, np.cos(th), np.sin(th), xs, xs)

    ns = 20_000 if quick else 100_000
    kx, ky = rng.uniform(-math.pi, math.pi, (2, ns))
    vals = rng.normal(size=ns) + 1j * rng.normal(size=ns)
    g = 2 * n
    tau = math.pi * 3 / (n * n * 2 * 1.5)
    yield "spread_gaussian", (kx, ky, vals, g, 3, tau)

    m, up = 128, 8
    tables = rng.normal(size=(na, m * up + 1)) + 1j * rng.normal(size=(na, m * up + 1))
    period = 2 * math.pi / 0.02
    yield "backproject_tables", (tables, np.cos(th), np.sin(th), period, period / (m * up),
                                 7.0, 1.2, n)

    img = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    yield "splat_project", (img, math.cos(0.7), math.sin(0.7))

    prof = rng.normal(size=n) + 1j * rng.normal(size=n)
    yield "interp_backproject", (prof, math.cos(0.7), math.sin(0.7))


def best_of(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="small sizes")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _core is None:
        print("compiled core not available; nothing to compare")
        return 1
    _core.set_num_threads(args.threads)
    print(f"{'kernel':<22}{'numpy [s]':>12}{'cython [s]':>12}{'speedup':>10}{'max diff':>12}")
    for name, call_args in cases(args.quick):
        py_fn, cy_fn = getattr(_pycore, name), getattr(_core, name)
        diff = np.max(np.abs(np.asarray(py_fn(*call_args)) - np.asarray(cy_fn(*call_args))))
        t_py = best_of(py_fn, call_args, args.repeat)
        t_cy = best_of(cy_fn, call_args, args.repeat)
        print(f"{name:<22}{t_py:>12.4f}{t_cy:>12.4f}{t_py / t_cy:>10.1f}{diff:>12.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
