"""Pure numpy implementations of the inner loops.

Same signatures and semantics as the compiled ``_core`` module; see that
module for argument conventions.
"""
import numpy as np

_SING_TOL = 1e-12
# pi split in two so that multiples of 2 pi subtract with extra precision
_PI_HI = 3.141592653589793
_PI_LO = 1.2246467991473532e-16


def dirichlet_ratio(m, y):
    """``sin(m y / 2) / sin(y / 2)`` with the removable singularities filled."""
    y = np.asarray(y, dtype=float)
    sign = 1.0
    if m == np.floor(m):
        # reduce to [-pi, pi]; period 2 pi, sign flips per turn when m is even
        r = np.floor(y / (2 * _PI_HI) + 0.5)
        y = (y - r * (2 * _PI_HI)) - r * (2 * _PI_LO)
        if m % 2 == 0:
            sign = np.where(r % 2 == 1, -1.0, 1.0)
    den = np.sin(0.5 * y)
    sing = np.abs(den) < _SING_TOL
    safe = np.where(sing, 1.0, den)
    out = np.sin(0.5 * m * y) / safe
    if np.any(sing):
        lim = m * np.cos(0.5 * m * y) / np.cos(0.5 * y)
        out = np.where(sing, lim, out)
    return sign * out


def kernel_field(kc, m, dk, cos_t, sin_t, xs, ys):
    """``sum_p exp(i kc u) D(dk u)``, ``u = xs[a] cos_t[p] + ys[b] sin_t[p]``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    out = np.zeros((xs.size, ys.size), dtype=complex)
    for c, s in zip(cos_t, sin_t):
        u = xs[:, None] * c + ys[None, :] * s
        out += np.exp(1j * kc * u) * dirichlet_ratio(m, dk * u)
    return out


def spread_gaussian(kx, ky, values, n_grid, half_width, tau):
    """Spread samples at ``(kx, ky)`` onto a periodic ``n_grid**2`` grid.

    Grid node ``(l1, l2)`` sits at ``(l1, l2) * 2 pi / n_grid``; each sample
    touches the ``2*half_width+1`` nearest nodes per axis with weight
    ``exp(-d**2 / (4 tau))``.
    """
    kx = np.asarray(kx, dtype=float)
    ky = np.asarray(ky, dtype=float)
    values = np.asarray(values, dtype=complex)
    step = 2 * np.pi / n_grid
    offs = np.arange(-half_width, half_width + 1)
    l1 = np.floor(kx / step + 0.5).astype(np.int64)[:, None] + offs
    l2 = np.floor(ky / step + 0.5).astype(np.int64)[:, None] + offs
    w1 = np.exp(-((l1 * step - kx[:, None]) ** 2) / (4 * tau))
    w2 = np.exp(-((l2 * step - ky[:, None]) ** 2) / (4 * tau))
    idx = (l1 % n_grid)[:, :, None] * n_grid + (l2 % n_grid)[:, None, :]
    w = values[:, None, None] * w1[:, :, None] * w2[:, None, :]
    size = n_grid * n_grid
    re = np.bincount(idx.ravel(), weights=w.real.ravel(), minlength=size)
    im = np.bincount(idx.ravel(), weights=w.imag.ravel(), minlength=size)
    return (re + 1j * im).reshape(n_grid, n_grid)


def backproject_tables(tables, cos_t, sin_t, period, delta, kappa1, cshift, n):
    """Accumulate tabulated range profiles over an ``n x n`` pixel grid.

    For azimuth ``p`` and pixel ``(j1, j2)``: ``u = j1 cos + j2 sin``,
    ``v = u mod period``; the contribution is the linear interpolation of
    ``tables[p]`` (spacing ``delta``, ``L + 1`` nodes) at ``v`` times
    ``exp(i (kappa1 u + cshift v))``.
    """
    tables = np.asarray(tables, dtype=complex)
    j = np.arange(-n // 2, n // 2, dtype=float)
    out = np.zeros((n, n), dtype=complex)
    last = tables.shape[1] - 2
    for p in range(tables.shape[0]):
        u = j[:, None] * cos_t[p] + j[None, :] * sin_t[p]
        v = u - period * np.floor(u / period)
        t = v / delta
        q = np.minimum(np.floor(t).astype(np.int64), last)
        fr = t - q
        row = tables[p]
        val = (1.0 - fr) * row[q] + fr * row[q + 1]
        out += val * np.exp(1j * (kappa1 * u + cshift * v))
    return out


def splat_project(image, c, s):
    """Pixel-driven projection: each pixel splits onto its two nearest bins."""
    image = np.asarray(image, dtype=complex)
    n = image.shape[0]
    j = np.arange(-n // 2, n // 2, dtype=float)
    t = (j[:, None] * c + j[None, :] * s).ravel() + n // 2
    q = np.floor(t).astype(np.int64)
    fr = t - q
    f = image.ravel()
    out = np.zeros(n + 1, dtype=complex)
    lo = (q >= 0) & (q < n)
    hi = (q + 1 >= 0) & (q + 1 < n)
    np.add.at(out, q[lo], (1.0 - fr[lo]) * f[lo])
    np.add.at(out, q[hi] + 1, fr[hi] * f[hi])
    return out[:n]


def interp_backproject(profile, c, s):
    """Adjoint of :func:`splat_project`: linear interpolation, zero outside."""
    profile = np.asarray(profile, dtype=complex)
    n = profile.size
    j = np.arange(-n // 2, n // 2, dtype=float)
    t = j[:, None] * c + j[None, :] * s + n // 2
    q = np.floor(t).astype(np.int64)
    fr = t - q
    padded = np.concatenate([[0], profile, [0, 0]])
    qa = np.clip(q, -1, n) + 1
    qb = np.clip(q + 1, -1, n) + 1
    return (1.0 - fr) * padded[qa] + fr * padded[qb]


def set_num_threads(n):
    """No-op; the numpy kernels are single-threaded."""
