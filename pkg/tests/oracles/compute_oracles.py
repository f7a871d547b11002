"""Independent reference values frozen into the test suite.

Nothing here imports the package. Run ``python3 tests/oracles/compute_oracles.py``
to regenerate; the printed numbers are pasted into the tests that use them.
"""
import math

import mpmath as mp

mp.mp.dps = 30


def wavenumbers():
    c = mp.mpf("3e8")
    k0 = 4 * mp.pi * mp.mpf("1e10") / c
    k30 = k0 * mp.cos(mp.mpf("0.5236"))
    kc30 = k0 * mp.cos(mp.pi / 6)
    return {"k_phi0": k0, "k_phi_0.5236": k30, "h_k_center_30deg": mp.mpf("0.02") * kc30}


def radii():
    c = mp.mpf("3e8")
    cos30 = mp.cos(mp.pi / 6)
    d_alpha = mp.mpf("600e6") / 511
    r = c / (4 * d_alpha * cos30)
    d_theta = 3 * mp.pi / 180 / 127
    rcr = c / (4 * mp.mpf("10.3e9") * cos30 * d_theta)
    return {"range_radius": r, "crossrange_radius": rcr}


def gibbs():
    # peak of the symmetric partial sum of a unit step: 1/2 + Si(pi)/pi
    return {"gibbs_peak": mp.mpf(1) / 2 + mp.si(mp.pi) / mp.pi}


def ramp_coefficient(k=5):
    # f(x) = 2x + 2 on [-1/2, 0), 2x on [0, 1/2); c_k = int f exp(-2 pi i k x) dx
    f = lambda x, off: (2 * x + off) * mp.exp(-2j * mp.pi * k * x)
    val = mp.quad(lambda x: f(x, 2), [-0.5, 0]) + mp.quad(lambda x: f(x, 0), [0, 0.5])
    return {"ramp_c5": val, "i_over_5pi": 1j / (5 * mp.pi)}


def shrink_example():
    # minimise F(z) = 1/2 |z - z0|^2 + |z| on a fine grid around z0 = 3 + 4i
    best = None
    step = 0.0005
    for i in range(-400, 401):
        for j in range(-400, 401):
            z = complex(2.4 + i * step, 3.2 + j * step)
            val = 0.5 * abs(z - (3 + 4j)) ** 2 + abs(z)
            if best is None or val < best[0]:
                best = (val, z)
    return {"shrink_grid_minimiser": best[1]}


def tiny_lasso():
    # min |f - b|^2 + lam |f|_1 per coordinate: f = shrink(b, lam / 2)
    b, lam = (3.0, 0.1), 1.0
    f = tuple(math.copysign(max(abs(v) - lam / 2, 0.0), v) for v in b)
    return {"lasso_b": b, "lasso_f": f}


if __name__ == "__main__":
    for block in (wavenumbers, radii, gibbs, ramp_coefficient, shrink_example, tiny_lasso):
        for name, val in block().items():
            print(f"{name} = {val}")
